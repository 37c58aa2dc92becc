#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>
#ifdef BRMOB_CONE_TRACE
#include <cstdio>
#endif

#include "brmob/error.hpp"
#include "brmob/linalg.hpp"

// Primal-dual interior point method for linear cone programs
//
//     minimize    c^T x
//     subject to  G x + s = h,  A x = b,  s in K,
//
// where K is a nonnegative orthant followed by second-order cones
// {(u0, u1) : u0 >= ||u1||}. Nesterov-Todd scaling with a Mehrotra
// predictor-corrector step; the reduced normal equations are factored with a
// sparse LDL^T and the equality rows are handled by a Schur complement.

namespace brmob {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct ConeProgram {
    Vector c;
    SparseMatrix g;
    Vector h;
    Matrix a;
    Vector b;
    std::size_t orthant = 0;
    std::vector<std::size_t> soc;  // sizes of the second-order cone blocks, in row order

    std::size_t variables() const noexcept { return static_cast<std::size_t>(c.size()); }
};

struct ConeOptions {
    int max_iterations = 100;
    double feasibility_tolerance = 1e-9;
    double absolute_gap = 1e-9;
    double relative_gap = 1e-9;
    double step_fraction = 0.99;
};

enum class ConeStatus { Optimal, IterationLimit, Stalled };

struct ConeSolution {
    Vector x;
    Vector s;
    Vector z;
    Vector y;
    ConeStatus status = ConeStatus::Stalled;
    int iterations = 0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

namespace cone_detail {

struct Layout {
    std::size_t orthant = 0;
    std::vector<std::size_t> soc;
    std::vector<std::size_t> offset;  // first row of each cone block
    std::size_t rows = 0;

    Layout(std::size_t l, const std::vector<std::size_t>& q) : orthant(l), soc(q) {
        rows = l;
        for (const std::size_t m : q) {
            require(m >= 1, ErrorKind::DimensionMismatch, "second-order cone blocks must be non-empty");
            offset.push_back(rows);
            rows += m;
        }
    }

    double degree() const noexcept { return static_cast<double>(orthant + soc.size()); }
};

// W for one second-order cone block: W = eta (2 w w^T - J), w^T J w = 1.
struct SocScaling {
    double eta = 1.0;
    Vector w;
};

struct Scaling {
    Vector d;  // orthant part: W = diag(d)
    std::vector<SocScaling> soc;
};

inline auto seg(Vector& v, std::size_t off, std::size_t m) {
    return v.segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(m));
}
inline auto seg(const Vector& v, std::size_t off, std::size_t m) {
    return v.segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(m));
}

// u^T J u for J = diag(1, -1, ..., -1).
inline double jnorm_sq(const Eigen::Ref<const Vector>& u) { return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm(); }

inline Vector identity_element(const Layout& l) {
    Vector e = Vector::Zero(static_cast<Eigen::Index>(l.rows));
    e.head(static_cast<Eigen::Index>(l.orthant)).setOnes();
    for (const std::size_t off : l.offset) e(static_cast<Eigen::Index>(off)) = 1.0;
    return e;
}

// min over blocks of the smallest eigenvalue: u_i for the orthant, u0 - ||u1|| per cone.
inline double cone_margin(const Layout& l, const Vector& u) {
    double margin = std::numeric_limits<double>::infinity();
    if (l.orthant > 0) margin = u.head(static_cast<Eigen::Index>(l.orthant)).minCoeff();
    for (std::size_t i = 0; i < l.soc.size(); ++i) {
        const auto blk = seg(u, l.offset[i], l.soc[i]);
        margin = std::min(margin, blk(0) - blk.tail(blk.size() - 1).norm());
    }
    return margin;
}

inline Scaling identity_scaling(const Layout& l) {
    Scaling w;
    w.d = Vector::Ones(static_cast<Eigen::Index>(l.orthant));
    for (const std::size_t m : l.soc) {
        SocScaling sc;
        sc.w = Vector::Zero(static_cast<Eigen::Index>(m));
        sc.w(0) = 1.0;
        w.soc.push_back(std::move(sc));
    }
    return w;
}

// Nesterov-Todd scaling: the W with W z = W^{-1} s. Returns false if s or z left the cone.
inline bool nt_scaling(const Layout& l, const Vector& s, const Vector& z, Scaling& w) {
    const auto lo = static_cast<Eigen::Index>(l.orthant);
    if (lo > 0) {
        if (!(s.head(lo).minCoeff() > 0.0) || !(z.head(lo).minCoeff() > 0.0)) return false;
        w.d = (s.head(lo).array() / z.head(lo).array()).sqrt();
    } else {
        w.d.resize(0);
    }
    w.soc.resize(l.soc.size());
    for (std::size_t i = 0; i < l.soc.size(); ++i) {
        const auto sb = seg(s, l.offset[i], l.soc[i]);
        const auto zb = seg(z, l.offset[i], l.soc[i]);
        const double sn = jnorm_sq(sb);
        const double zn = jnorm_sq(zb);
        if (!(sn > 0.0) || !(zn > 0.0) || sb(0) <= 0.0 || zb(0) <= 0.0) return false;
        const Vector st = sb / std::sqrt(sn);
        const Vector zt = zb / std::sqrt(zn);
        const double gamma = std::sqrt(0.5 * (1.0 + st.dot(zt)));
        Vector wv = st;
        wv(0) += zt(0);
        wv.tail(wv.size() - 1) -= zt.tail(zt.size() - 1);
        wv /= 2.0 * gamma;
        // wv is the scaling point; W itself uses v = (wv + e) / sqrt(2 (wv0 + 1)).
        const double scale = 1.0 / std::sqrt(2.0 * (wv(0) + 1.0));
        wv(0) += 1.0;
        w.soc[i].eta = std::pow(sn / zn, 0.25);
        w.soc[i].w = scale * wv;
    }
    return true;
}

// W v, or W^{-1} v when inverse is set.
inline Vector apply_w(const Layout& l, const Scaling& w, const Vector& v, bool inverse) {
    Vector out(v.size());
    const auto lo = static_cast<Eigen::Index>(l.orthant);
    if (lo > 0) {
        if (inverse) {
            out.head(lo) = v.head(lo).cwiseQuotient(w.d);
        } else {
            out.head(lo) = v.head(lo).cwiseProduct(w.d);
        }
    }
    for (std::size_t i = 0; i < l.soc.size(); ++i) {
        const auto vb = seg(v, l.offset[i], l.soc[i]);
        auto ob = seg(out, l.offset[i], l.soc[i]);
        const SocScaling& sc = w.soc[i];
        // J v
        Vector jv = -vb;
        jv(0) = vb(0);
        if (!inverse) {
            ob = sc.eta * (2.0 * sc.w.dot(vb) * sc.w - jv);
        } else {
            Vector jw = -sc.w;
            jw(0) = sc.w(0);
            ob = (2.0 * jw.dot(vb) * jw - jv) / sc.eta;
        }
    }
    return out;
}

inline Vector jordan_product(const Layout& l, const Vector& u, const Vector& v) {
    Vector out(u.size());
    const auto lo = static_cast<Eigen::Index>(l.orthant);
    if (lo > 0) out.head(lo) = u.head(lo).cwiseProduct(v.head(lo));
    for (std::size_t i = 0; i < l.soc.size(); ++i) {
        const auto ub = seg(u, l.offset[i], l.soc[i]);
        const auto vb = seg(v, l.offset[i], l.soc[i]);
        auto ob = seg(out, l.offset[i], l.soc[i]);
        const Eigen::Index m = ub.size() - 1;
        ob(0) = ub.dot(vb);
        ob.tail(m) = ub(0) * vb.tail(m) + vb(0) * ub.tail(m);
    }
    return out;
}

// u with lambda o u = d.
inline Vector jordan_divide(const Layout& l, const Vector& lambda, const Vector& d) {
    Vector out(d.size());
    const auto lo = static_cast<Eigen::Index>(l.orthant);
    if (lo > 0) out.head(lo) = d.head(lo).cwiseQuotient(lambda.head(lo));
    for (std::size_t i = 0; i < l.soc.size(); ++i) {
        const auto lb = seg(lambda, l.offset[i], l.soc[i]);
        const auto db = seg(d, l.offset[i], l.soc[i]);
        auto ob = seg(out, l.offset[i], l.soc[i]);
        const Eigen::Index m = lb.size() - 1;
        const double u0 = (lb(0) * db(0) - lb.tail(m).dot(db.tail(m))) / jnorm_sq(lb);
        ob(0) = u0;
        ob.tail(m) = (db.tail(m) - u0 * lb.tail(m)) / lb(0);
    }
    return out;
}

// Largest alpha with lambda + alpha * delta in K (infinity if unbounded); lambda interior.
inline double max_step(const Layout& l, const Vector& lambda, const Vector& delta) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < l.orthant; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        if (delta(ii) < 0.0) alpha = std::min(alpha, -lambda(ii) / delta(ii));
    }
    for (std::size_t i = 0; i < l.soc.size(); ++i) {
        const auto lb = seg(lambda, l.offset[i], l.soc[i]);
        const auto db = seg(delta, l.offset[i], l.soc[i]);
        const Eigen::Index m = lb.size() - 1;
        // q(a) = qa a^2 + 2 qb a + qc, smallest positive root.
        const double qa = jnorm_sq(db);
        const double qb = lb(0) * db(0) - lb.tail(m).dot(db.tail(m));
        const double qc = jnorm_sq(lb);
        double root = std::numeric_limits<double>::infinity();
        if (qa == 0.0) {
            if (qb < 0.0) root = -qc / (2.0 * qb);
        } else {
            const double disc = qb * qb - qa * qc;
            if (disc >= 0.0) {
                const double q = -(qb + std::copysign(std::sqrt(disc), qb));
                for (const double r : {q / qa, q != 0.0 ? qc / q : std::numeric_limits<double>::infinity()}) {
                    if (r > 0.0) root = std::min(root, r);
                }
            }
        }
        // The head must also stay positive along the segment.
        if (db(0) < 0.0) root = std::min(root, -lb(0) / db(0));
        alpha = std::min(alpha, root);
    }
    return alpha;
}

// Solves [0 A^T G^T; A 0 0; G 0 -W^2] [ux; uy; uz] = [bx; by; bz].
class KktSolver {
public:
    KktSolver(const ConeProgram& p, const Layout& l, const Scaling& w) : p_(p), l_(l), w_(w) {
        const auto n = static_cast<Eigen::Index>(p.variables());
        dense_ = p.variables() <= kDenseLimit;
        double max_diag = 0.0;
        if (dense_) {
            const Matrix m = scaled_g_dense();
            dense_n_ = m.transpose() * m;
            max_diag = dense_n_.diagonal().maxCoeff();
            Matrix reg = dense_n_;
            reg.diagonal().array() += kRegularization * std::max(1.0, max_diag);
            dense_ldlt_.compute(reg);
            ok_ = dense_ldlt_.info() == Eigen::Success;
        } else {
            const Eigen::SparseMatrix<double> m = scaled_g();
            n_ = m.transpose() * m;
            for (Eigen::Index i = 0; i < n; ++i) max_diag = std::max(max_diag, n_.coeff(i, i));
            Eigen::SparseMatrix<double> reg(n, n);
            reg.setIdentity();
            reg *= kRegularization * std::max(1.0, max_diag);
            ldlt_.compute(n_ + reg);
            ok_ = ldlt_.info() == Eigen::Success;
        }
        if (ok_ && p.a.rows() > 0) {
            y_ = solve_n(Matrix(p.a.transpose()));
            schur_.compute(p.a * y_);
            ok_ = schur_.info() == Eigen::Success;
        }
    }

    bool ok() const noexcept { return ok_; }

    void solve(const Vector& bx, const Vector& by, const Vector& bz, Vector& ux, Vector& uy, Vector& uz) const {
        solve_once(bx, by, bz, ux, uy, uz);
        // Iterative refinement on the full system; the reduced one is badly
        // conditioned once W has entries of very different size.
        for (int round = 0; round < 3; ++round) {
            const Vector r1 = bx - p_.g.transpose() * uz - at_times(uy);
            const Vector r2 = p_.a.rows() > 0 ? Vector(by - p_.a * ux) : Vector(0);
            const Vector r3 = bz - p_.g * ux + apply_w(l_, w_, apply_w(l_, w_, uz, false), false);
            Vector cx;
            Vector cy;
            Vector cz;
            solve_once(r1, r2, r3, cx, cy, cz);
            ux += cx;
            if (p_.a.rows() > 0) uy += cy;
            uz += cz;
        }
    }

private:
    // W^{-1} G, row block by row block.
    Eigen::SparseMatrix<double> scaled_g() const {
        const SparseMatrix& g = p_.g;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(g.nonZeros()) * 2);
        for (std::size_t i = 0; i < l_.orthant; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            for (SparseMatrix::InnerIterator it(g, row); it; ++it) {
                trip.emplace_back(row, it.col(), it.value() / w_.d(row));
            }
        }
        std::vector<double> r(p_.variables(), 0.0);
        std::vector<char> touched(p_.variables(), 0);
        std::vector<Eigen::Index> cols;
        for (std::size_t b = 0; b < l_.soc.size(); ++b) {
            const SocScaling& sc = w_.soc[b];
            const auto off = static_cast<Eigen::Index>(l_.offset[b]);
            const auto m = static_cast<Eigen::Index>(l_.soc[b]);
            // J w
            Vector jw = -sc.w;
            jw(0) = sc.w(0);
            cols.clear();
            for (Eigen::Index i = 0; i < m; ++i) {
                for (SparseMatrix::InnerIterator it(g, off + i); it; ++it) {
                    const auto c = static_cast<std::size_t>(it.col());
                    if (!touched[c]) {
                        touched[c] = 1;
                        cols.push_back(it.col());
                    }
                    r[c] += jw(i) * it.value();
                }
            }
            for (Eigen::Index i = 0; i < m; ++i) {
                const double jii = i == 0 ? 1.0 : -1.0;
                for (SparseMatrix::InnerIterator it(g, off + i); it; ++it) {
                    trip.emplace_back(off + i, it.col(), -jii * it.value() / sc.eta);
                }
                for (const Eigen::Index c : cols) {
                    trip.emplace_back(off + i, c, 2.0 * jw(i) * r[static_cast<std::size_t>(c)] / sc.eta);
                }
            }
            for (const Eigen::Index c : cols) {
                r[static_cast<std::size_t>(c)] = 0.0;
                touched[static_cast<std::size_t>(c)] = 0;
            }
        }
        Eigen::SparseMatrix<double> out(g.rows(), g.cols());
        out.setFromTriplets(trip.begin(), trip.end());
        return out;
    }

    Matrix scaled_g_dense() const {
        Matrix m = Matrix(p_.g);
        const auto lo = static_cast<Eigen::Index>(l_.orthant);
        if (lo > 0) m.topRows(lo).array().colwise() /= w_.d.array();
        for (std::size_t b = 0; b < l_.soc.size(); ++b) {
            const SocScaling& sc = w_.soc[b];
            auto blk = m.middleRows(static_cast<Eigen::Index>(l_.offset[b]), static_cast<Eigen::Index>(l_.soc[b]));
            Vector jw = -sc.w;
            jw(0) = sc.w(0);
            const Eigen::RowVectorXd r = jw.transpose() * blk;
            blk.bottomRows(blk.rows() - 1) *= -1.0;
            blk = (2.0 * jw * r - blk) / sc.eta;
        }
        return m;
    }

    Vector solve_n(const Vector& rhs) const { return dense_ ? Vector(dense_ldlt_.solve(rhs)) : Vector(ldlt_.solve(rhs)); }

    Matrix solve_n(const Matrix& rhs) const {
        Matrix out(rhs.rows(), rhs.cols());
        for (Eigen::Index j = 0; j < rhs.cols(); ++j) out.col(j) = solve_n(Vector(rhs.col(j)));
        return out;
    }

    Vector at_times(const Vector& uy) const {
        if (p_.a.rows() == 0) return Vector::Zero(p_.g.cols());
        return p_.a.transpose() * uy;
    }

    void solve_once(const Vector& bx, const Vector& by, const Vector& bz, Vector& ux, Vector& uy, Vector& uz) const {
        const Vector wbz = apply_w(l_, w_, apply_w(l_, w_, bz, true), true);
        reduced_solve(bx + p_.g.transpose() * wbz, by, ux, uy);
        const Vector gx = p_.g * ux - bz;
        uz = apply_w(l_, w_, apply_w(l_, w_, gx, true), true);
    }

    void reduced_solve(const Vector& r, const Vector& by, Vector& ux, Vector& uy) const {
        const Vector v = solve_n(r);
        if (p_.a.rows() == 0) {
            ux = v;
            uy.resize(0);
            return;
        }
        uy = schur_.solve(p_.a * v - by);
        ux = v - y_ * uy;
    }

    const ConeProgram& p_;
    const Layout& l_;
    const Scaling& w_;
    // Programs with few variables form the normal matrix densely.
    static constexpr std::size_t kDenseLimit = 256;
    static constexpr double kRegularization = 1e-13;

    bool dense_ = false;
    Matrix dense_n_;
    Eigen::LDLT<Matrix> dense_ldlt_;
    Eigen::SparseMatrix<double> n_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    Matrix y_;
    Eigen::LDLT<Matrix> schur_;
    bool ok_ = false;
};

}  // namespace cone_detail

inline ConeSolution solve_cone_program(const ConeProgram& p, const ConeOptions& opt = {}) {
    using namespace cone_detail;
    const Layout l(p.orthant, p.soc);
    const auto n = static_cast<Eigen::Index>(p.variables());
    require(n > 0, ErrorKind::DimensionMismatch, "cone program has no variables");
    require(p.g.cols() == n && p.g.rows() == static_cast<Eigen::Index>(l.rows) && p.h.size() == p.g.rows(),
            ErrorKind::DimensionMismatch, "cone program: G/h do not match the cone layout");
    require(p.a.cols() == n || p.a.rows() == 0, ErrorKind::DimensionMismatch, "cone program: A has wrong width");
    require(p.b.size() == p.a.rows(), ErrorKind::DimensionMismatch, "cone program: b has wrong size");

    const Vector e = identity_element(l);
    const double res_y0 = std::max(1.0, p.b.norm());
    const double res_z0 = std::max(1.0, p.h.norm());
    const double res_x0 = std::max(1.0, p.c.norm());

    ConeSolution sol;
    ConeSolution best;
    double best_merit = std::numeric_limits<double>::infinity();
    Vector& x = sol.x;
    Vector& s = sol.s;
    Vector& z = sol.z;
    Vector& y = sol.y;

    // Starting point from two least-norm problems with W = I, shifted into the cone.
    {
        const Scaling id = identity_scaling(l);
        const KktSolver kkt(p, l, id);
        require(kkt.ok(), ErrorKind::NotPositiveDefinite, "cone program: singular initial KKT system");
        Vector tmp_y;
        Vector tmp_z;
        kkt.solve(Vector::Zero(n), p.b, p.h, x, tmp_y, tmp_z);
        s = -tmp_z;
        Vector tmp_x;
        kkt.solve(-p.c, Vector::Zero(p.b.size()), Vector::Zero(p.h.size()), tmp_x, y, z);
        for (Vector* v : {&s, &z}) {
            const double shift = -cone_margin(l, *v);
            if (shift >= -1e-8 * std::max(1.0, v->norm())) *v += (1.0 + shift) * e;
        }
    }

    Scaling w;
    for (int it = 0;; ++it) {
        const Vector rx = p.g.transpose() * z + (p.a.rows() > 0 ? Vector(p.a.transpose() * y) : Vector::Zero(n)) + p.c;
        const Vector ry = p.a.rows() > 0 ? Vector(p.a * x - p.b) : Vector(0);
        const Vector rz = p.g * x + s - p.h;
        sol.iterations = it;
        sol.primal_objective = p.c.dot(x);
        sol.dual_objective = -p.h.dot(z) - p.b.dot(y);
        sol.gap = s.dot(z);
        sol.primal_residual = std::max(ry.size() > 0 ? ry.norm() / res_y0 : 0.0, rz.norm() / res_z0);
        sol.dual_residual = rx.norm() / res_x0;
#ifdef BRMOB_CONE_TRACE
        std::fprintf(stderr, "it %d p %.9g d %.9g gap %.3g pres %.3g dres %.3g\n", it, sol.primal_objective, sol.dual_objective, sol.gap, sol.primal_residual, sol.dual_residual);
#endif
        double rel_gap = std::numeric_limits<double>::infinity();
        if (sol.primal_objective < 0.0) rel_gap = sol.gap / -sol.primal_objective;
        if (sol.dual_objective > 0.0) rel_gap = sol.gap / sol.dual_objective;
        const bool converged = sol.primal_residual <= opt.feasibility_tolerance &&
                               sol.dual_residual <= opt.feasibility_tolerance &&
                               (sol.gap <= opt.absolute_gap || rel_gap <= opt.relative_gap);
        if (converged) {
            sol.status = ConeStatus::Optimal;
            return sol;
        }
        // Close to the boundary the scaled system loses accuracy and residuals can
        // grow again; the best iterate seen so far is what gets returned.
        const double merit = std::max({sol.primal_residual, sol.dual_residual,
                                       sol.gap / std::max(1.0, std::abs(sol.primal_objective))});
        if (merit < best_merit) {
            best_merit = merit;
            best = sol;
        }
        const auto give_up = [&](ConeStatus status) {
            best.status = status;
            return best;
        };
        if (it >= opt.max_iterations) return give_up(ConeStatus::IterationLimit);
        if (merit > 1e4 * best_merit) return give_up(ConeStatus::Stalled);
        if (!nt_scaling(l, s, z, w)) return give_up(ConeStatus::Stalled);
        const Vector lambda = apply_w(l, w, z, false);
        const double mu = lambda.squaredNorm() / l.degree();
        const KktSolver kkt(p, l, w);
        if (!kkt.ok()) return give_up(ConeStatus::Stalled);

        // Newton direction for the scaled complementarity right-hand side ds.
        Vector dx;
        Vector dy;
        Vector dz;
        Vector dsw;  // W^{-1} ds
        Vector dzw;  // W dz
        const auto newton = [&](const Vector& ds_rhs) {
            const Vector v = jordan_divide(l, lambda, ds_rhs);
            kkt.solve(-rx, -ry, Vector(-rz - apply_w(l, w, v, false)), dx, dy, dz);
            dzw = apply_w(l, w, dz, false);
            dsw = v - dzw;
        };

        const Vector lambda_sq = jordan_product(l, lambda, lambda);
        newton(-lambda_sq);
        const double affine = std::min({1.0, max_step(l, lambda, dsw), max_step(l, lambda, dzw)});
        const double sigma = std::pow(1.0 - affine, 3.0);

        newton(Vector(-lambda_sq - jordan_product(l, dsw, dzw) + sigma * mu * e));
        const double alpha = std::min(1.0, opt.step_fraction * std::min(max_step(l, lambda, dsw), max_step(l, lambda, dzw)));
        if (!(alpha > 1e-14) || !dx.allFinite() || !dz.allFinite()) return give_up(ConeStatus::Stalled);
        x += alpha * dx;
        s += alpha * apply_w(l, w, dsw, false);
        z += alpha * dz;
        if (p.a.rows() > 0) y += alpha * dy;
    }
}

}  // namespace brmob
