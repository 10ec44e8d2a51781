#include "ringwave/lattice.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "ringwave/errors.hpp"

namespace ringwave {

namespace {

inline int wrap(int j, int n) { return ((j % n) + n) % n; }

void require_finite(const Vec& q, const char* what) {
    if (!q.allFinite()) throw std::domain_error(std::string(what) + ": non-finite input");
}

}  // namespace

LatticeModel::LatticeModel(int n, PotentialSpec onsite, PotentialSpec coupling, double equilibrium_seed,
                           bool zero_mean_mode)
    : n_(n), onsite_(std::move(onsite)), coupling_(std::move(coupling)), zero_mean_(zero_mean_mode) {
    if (n_ < 3) throw ConfigError("ring size n must be at least 3, got " + std::to_string(n_));
    if (onsite_.role() != Role::Onsite) throw ConfigError("on-site potential must have role onsite");
    if (coupling_.role() != Role::Coupling) throw ConfigError("coupling potential must have role coupling");
    if (std::abs(coupling_.d1(0.0)) > kEquilibriumTol)
        throw ConfigError("coupling potential must satisfy W'(0) = 0");
    if (zero_mean_ && onsite_.family() != Family::Zero)
        throw ConfigError("zero_mean_mode requires the zero on-site potential");

    a_ = find_equilibrium(onsite_, equilibrium_seed).a;
    upp_ = onsite_.d2(a_);
    wpp_ = coupling_.d2(0.0);
}

double LatticeModel::potential(const Vec& q) const {
    require_finite(q, "potential");
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += onsite_.value(q[j]) + coupling_.value(q[j] - q[wrap(j - 1, n_)]);
    return v;
}

Vec LatticeModel::grad_V(const Vec& q) const {
    require_finite(q, "grad_V");
    Vec g(n_);
    for (int j = 0; j < n_; ++j) {
        const double back = q[j] - q[wrap(j - 1, n_)];
        const double fwd = q[wrap(j + 1, n_)] - q[j];
        g[j] = onsite_.d1(q[j]) + coupling_.d1(back) - coupling_.d1(fwd);
    }
    return g;
}

Mat LatticeModel::hessian_V(const Vec& q) const {
    require_finite(q, "hessian_V");
    Mat h = Mat::Zero(n_, n_);
    for (int j = 0; j < n_; ++j) {
        const int prev = wrap(j - 1, n_);
        // Bond (prev, j) carries W''(q_j - q_prev) in a [[1,-1],[-1,1]] stencil.
        const double w = coupling_.d2(q[j] - q[prev]);
        h(j, j) += onsite_.d2(q[j]) + w;
        h(prev, prev) += w;
        h(j, prev) -= w;
        h(prev, j) -= w;
    }
    return h;
}

Vec LatticeModel::hessian_apply(const Vec& q, const Vec& y) const {
    Vec out(n_);
    for (int j = 0; j < n_; ++j) {
        const int prev = wrap(j - 1, n_);
        const int next = wrap(j + 1, n_);
        out[j] = onsite_.d2(q[j]) * y[j] + coupling_.d2(q[j] - q[prev]) * (y[j] - y[prev]) -
                 coupling_.d2(q[next] - q[j]) * (y[next] - y[j]);
    }
    return out;
}

Reflection LatticeModel::reflection() const {
    if (coupling_.is_even_about(0.0)) return Reflection::Plain;
    if (onsite_.is_even_about(a_)) return Reflection::Signed;
    return Reflection::Broken;
}

Mat second_difference_matrix(int n) {
    Mat a = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        a(j, j) = 2.0;
        a(j, wrap(j + 1, n)) -= 1.0;
        a(j, wrap(j - 1, n)) -= 1.0;
    }
    return a;
}

double circulant_eigenvalue(int n, int k) {
    const int kk = wrap(k, n);
    if (kk == 0) return 0.0;
    const double s = std::sin(std::numbers::pi * kk / n);
    return 4.0 * s * s;
}

CirculantBasis circulant_basis(int n) {
    if (n < 3) throw PreconditionError("circulant basis needs n >= 3");
    CirculantBasis b;
    b.n = n;
    b.vectors.resize(n, n);
    b.mu.resize(static_cast<std::size_t>(n));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 1; k <= n; ++k) {
        for (int j = 0; j < n; ++j) {
            // Reduce j*k mod n before forming the angle so conj(e_k) = e_{n-k} holds exactly.
            const int m = (j * k) % n;
            const double ang = 2.0 * std::numbers::pi * m / n;
            b.vectors(j, k - 1) = scale * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        b.mu[static_cast<std::size_t>(k - 1)] = circulant_eigenvalue(n, k);
    }
    return b;
}

CVec to_mode_coords(const CirculantBasis& basis, const CVec& x) { return basis.vectors.adjoint() * x; }

CVec from_mode_coords(const CirculantBasis& basis, const CVec& coeffs) { return basis.vectors * coeffs; }

void write_matrix_csv(std::ostream& os, const Mat& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << fmt::format("{:.17g}", m(i, j));
        }
        os << '\n';
    }
}

}  // namespace ringwave
