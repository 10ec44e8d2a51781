#include "ringwave/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <unsupported/Eigen/FFT>
#include <json.hpp>

#include "ringwave/errors.hpp"

namespace ringwave {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// LoopState

LoopState::LoopState(int n, int l0, double nu) : n_(n), l0_(l0), nu_(nu), coeffs_(CMat::Zero(n, l0 + 1)) {
    if (n < 1 || l0 < 1) throw PreconditionError("loop needs n >= 1 and l0 >= 1");
}

Vec LoopState::pack() const {
    Vec v(packed_size());
    for (int j = 0; j < n_; ++j) v[j] = coeffs_(j, 0).real();
    for (int l = 1; l <= l0_; ++l) {
        const int base = packed_index(n_, l, 0);
        for (int j = 0; j < n_; ++j) {
            v[base + j] = coeffs_(j, l).real();
            v[base + n_ + j] = coeffs_(j, l).imag();
        }
    }
    return v;
}

LoopState LoopState::unpack(const Vec& packed, int n, int l0, double nu) {
    LoopState x(n, l0, nu);
    if (packed.size() != x.packed_size()) throw PreconditionError("packed vector has the wrong length");
    for (int j = 0; j < n; ++j) x.coeffs_(j, 0) = packed[j];
    for (int l = 1; l <= l0; ++l) {
        const int base = packed_index(n, l, 0);
        for (int j = 0; j < n; ++j) x.coeffs_(j, l) = cplx(packed[base + j], packed[base + n + j]);
    }
    return x;
}

double LoopState::value(int j, double t) const {
    double v = coeffs_(j, 0).real();
    for (int l = 1; l <= l0_; ++l) v += 2.0 * (coeffs_(j, l) * std::polar(1.0, l * t)).real();
    return v;
}

double LoopState::derivative(int j, double t) const {
    double v = 0.0;
    for (int l = 1; l <= l0_; ++l) v += 2.0 * (cplx(0.0, l) * coeffs_(j, l) * std::polar(1.0, l * t)).real();
    return v;
}

Vec LoopState::value(double t) const {
    Vec v(n_);
    for (int j = 0; j < n_; ++j) v[j] = value(j, t);
    return v;
}

Vec LoopState::derivative(double t) const {
    Vec v(n_);
    for (int j = 0; j < n_; ++j) v[j] = derivative(j, t);
    return v;
}

double LoopState::l2_norm() const {
    double s = coeffs_.col(0).squaredNorm();
    for (int l = 1; l <= l0_; ++l) s += 2.0 * coeffs_.col(l).squaredNorm();
    return std::sqrt(s);
}

double LoopState::sobolev_norm() const {
    double s = coeffs_.col(0).squaredNorm();
    for (int l = 1; l <= l0_; ++l) s += 2.0 * (1.0 + double(l) * l) * coeffs_.col(l).squaredNorm();
    return std::sqrt(s);
}

double LoopState::tail_fraction(int top) const {
    const double total = l2_norm();
    if (total == 0.0) return 0.0;
    double s = 0.0;
    for (int l = std::max(1, l0_ - top + 1); l <= l0_; ++l) s += 2.0 * coeffs_.col(l).squaredNorm();
    return std::sqrt(s) / total;
}

LoopState LoopState::resized(int l0) const {
    LoopState out(n_, l0, nu_);
    const int keep = std::min(l0, l0_);
    out.coeffs_.leftCols(keep + 1) = coeffs_.leftCols(keep + 1);
    return out;
}

LoopState& LoopState::operator+=(const LoopState& other) {
    if (other.n_ != n_ || other.l0_ != l0_) throw PreconditionError("loop shapes differ");
    coeffs_ += other.coeffs_;
    return *this;
}

LoopState& LoopState::operator*=(double s) {
    coeffs_ *= s;
    return *this;
}

LoopState operator+(LoopState a, const LoopState& b) { return a += b; }
LoopState operator-(LoopState a, const LoopState& b) { return a += (-1.0) * b; }
LoopState operator*(double s, LoopState a) { return a *= s; }

// ---------------------------------------------------------------------------
// JSON

std::string loop_to_json(const LoopState& x, std::string_view meta_json) {
    nlohmann::ordered_json j;
    if (!meta_json.empty()) j["meta"] = nlohmann::ordered_json::parse(meta_json);
    j["n"] = x.n();
    j["l0"] = x.l0();
    j["nu"] = x.nu();
    auto re = nlohmann::ordered_json::array();
    auto im = nlohmann::ordered_json::array();
    for (int l = 0; l <= x.l0(); ++l) {
        auto rr = nlohmann::ordered_json::array();
        auto ii = nlohmann::ordered_json::array();
        for (int s = 0; s < x.n(); ++s) {
            rr.push_back(x.coeff(l, s).real());
            ii.push_back(x.coeff(l, s).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ii));
    }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j.dump(1) + "\n";
}

LoopState loop_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("loop JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("loop JSON: expected an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "n" && key != "l0" && key != "nu" && key != "re" && key != "im" && key != "meta")
            throw ConfigError("loop JSON: unknown key '" + key + "'");
    }
    try {
        const int n = j.at("n").get<int>();
        const int l0 = j.at("l0").get<int>();
        const double nu = j.at("nu").get<double>();
        const auto& re = j.at("re");
        const auto& im = j.at("im");
        if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != l0 + 1 ||
            static_cast<int>(im.size()) != l0 + 1)
            throw ConfigError("loop JSON: re/im must hold l0 + 1 rows");
        LoopState x(n, l0, nu);
        for (int l = 0; l <= l0; ++l) {
            if (static_cast<int>(re[l].size()) != n || static_cast<int>(im[l].size()) != n)
                throw ConfigError("loop JSON: row " + std::to_string(l) + " must hold n entries");
            for (int s = 0; s < n; ++s) x.coeffs()(s, l) = cplx(re[l][s].get<double>(), im[l][s].get<double>());
        }
        for (int s = 0; s < n; ++s)
            if (x.coeff(0, s).imag() != 0.0) throw ConfigError("loop JSON: harmonic 0 must be real");
        return x;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("loop JSON: ") + e.what());
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("loop JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// HarmonicBalance

int nice_fft_size(int m) {
    for (int s = std::max(2, m);; ++s) {
        if (s % 2) continue;
        int r = s;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return s;
    }
}

struct HarmonicBalance::Fft {
    Eigen::FFT<double> engine;
    std::vector<cplx> freq;
    std::vector<cplx> time;
};

HarmonicBalance::HarmonicBalance(const LatticeModel& model, int l0)
    : model_(model), l0_(l0), grid_(nice_fft_size(4 * l0 + 2)), fft_(std::make_unique<Fft>()) {
    if (l0 < 1) throw PreconditionError("harmonic cutoff l0 must be >= 1");
    fft_->freq.resize(static_cast<std::size_t>(grid_));
    fft_->time.resize(static_cast<std::size_t>(grid_));
}

HarmonicBalance::~HarmonicBalance() = default;
HarmonicBalance::HarmonicBalance(HarmonicBalance&&) noexcept = default;
HarmonicBalance& HarmonicBalance::operator=(HarmonicBalance&&) noexcept = default;

Mat HarmonicBalance::samples(const LoopState& x) const {
    const int n = model_.n();
    const int N = grid_;
    const int lmax = std::min(x.l0(), N / 2 - 1);
    Mat out(n, N);
    for (int j = 0; j < n; ++j) {
        std::fill(fft_->freq.begin(), fft_->freq.end(), cplx(0.0));
        fft_->freq[0] = cplx(x.coeff(0, j).real(), 0.0);
        for (int l = 1; l <= lmax; ++l) {
            fft_->freq[static_cast<std::size_t>(l)] = x.coeff(l, j);
            fft_->freq[static_cast<std::size_t>(N - l)] = std::conj(x.coeff(l, j));
        }
        fft_->engine.inv(fft_->time, fft_->freq);
        for (int m = 0; m < N; ++m) out(j, m) = fft_->time[static_cast<std::size_t>(m)].real() * N;
    }
    return out;
}

CMat HarmonicBalance::coefficients(const Mat& s, int l_max) const {
    const int n = static_cast<int>(s.rows());
    const int N = grid_;
    CMat out(n, l_max + 1);
    for (int j = 0; j < n; ++j) {
        for (int m = 0; m < N; ++m) fft_->time[static_cast<std::size_t>(m)] = cplx(s(j, m), 0.0);
        fft_->engine.fwd(fft_->freq, fft_->time);
        out(j, 0) = cplx(fft_->freq[0].real() / N, 0.0);
        for (int l = 1; l <= l_max; ++l) out(j, l) = fft_->freq[static_cast<std::size_t>(l)] / double(N);
    }
    return out;
}

namespace {

Mat gradient_samples(const LatticeModel& model, const Mat& q) {
    Mat g(q.rows(), q.cols());
    for (Eigen::Index m = 0; m < q.cols(); ++m) {
        const Vec col = q.col(m);
        if (!col.allFinite()) throw SolverError("non-finite loop samples");
        g.col(m) = model.grad_V(col);
    }
    if (!g.allFinite()) throw SolverError("non-finite force samples (potential overflow)");
    return g;
}

}  // namespace

ResidualReport HarmonicBalance::residual(const LoopState& x) const {
    if (x.l0() != l0_ || x.n() != model_.n()) throw PreconditionError("loop shape does not match the discretisation");
    const Mat q = samples(x).array() + model_.a();
    const Mat g = gradient_samples(model_, q);
    const int l_all = grid_ / 2 - 1;
    const CMat gc = coefficients(g, l_all);

    ResidualReport rep;
    rep.coeffs.resize(model_.n(), l0_ + 1);
    rep.per_harmonic.resize(static_cast<std::size_t>(l0_ + 1));
    const double nu2 = x.nu() * x.nu();
    double total = 0.0;
    double tail = 0.0;
    for (int l = 0; l <= l0_; ++l) {
        rep.coeffs.col(l) = (nu2 * l * l) * x.coeffs().col(l) - gc.col(l);
        if (l == 0) rep.coeffs.col(0) = rep.coeffs.col(0).real().cast<cplx>();
        const double w = l == 0 ? 1.0 : 2.0;
        const double sq = w * rep.coeffs.col(l).squaredNorm();
        rep.per_harmonic[static_cast<std::size_t>(l)] = std::sqrt(sq);
        total += sq;
        if (l > l0_ - 2) tail += sq;
    }
    double discarded = 0.0;
    for (int l = l0_ + 1; l <= l_all; ++l) discarded += 2.0 * gc.col(l).squaredNorm();
    rep.total = std::sqrt(total);
    rep.tail = std::sqrt(tail);
    rep.discarded = std::sqrt(discarded);
    return rep;
}

Vec HarmonicBalance::residual_packed(const LoopState& x) const {
    LoopState f(model_.n(), l0_, x.nu());
    f.coeffs() = residual(x).coeffs;
    return f.pack();
}

LoopState HarmonicBalance::jacobian_action(const LoopState& x, const LoopState& y) const {
    Mat basis = y.pack();
    const Vec out = jacobian(x, basis).col(0);
    return LoopState::unpack(out, model_.n(), l0_, x.nu());
}

Mat HarmonicBalance::jacobian(const LoopState& x, const Mat& basis) const {
    const int n = model_.n();
    const int N = grid_;
    if (basis.rows() != packed_size()) throw PreconditionError("basis rows do not match the packed size");
    const Mat q = samples(x).array() + model_.a();

    // Pointwise Hessian stencil: onsite curvature and the curvature of bond (j-1, j).
    Mat upp(n, N);
    Mat wpp(n, N);
    for (int m = 0; m < N; ++m) {
        for (int j = 0; j < n; ++j) {
            const int prev = (j + n - 1) % n;
            upp(j, m) = model_.onsite().d2(q(j, m));
            wpp(j, m) = model_.coupling().d2(q(j, m) - q(prev, m));
        }
    }

    const double nu2 = x.nu() * x.nu();
    Mat out(basis.rows(), basis.cols());
    Mat z(n, N);
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        const LoopState y = LoopState::unpack(basis.col(c), n, l0_, x.nu());
        const Mat ys = samples(y);
        for (int m = 0; m < N; ++m) {
            for (int j = 0; j < n; ++j) {
                const int prev = (j + n - 1) % n;
                const int next = (j + 1) % n;
                z(j, m) = upp(j, m) * ys(j, m) + wpp(j, m) * (ys(j, m) - ys(prev, m)) -
                          wpp(next, m) * (ys(next, m) - ys(j, m));
            }
        }
        const CMat zc = coefficients(z, l0_);
        LoopState r(n, l0_, x.nu());
        for (int l = 0; l <= l0_; ++l) r.coeffs().col(l) = (nu2 * l * l) * y.coeffs().col(l) - zc.col(l);
        r.coeffs().col(0) = r.coeffs().col(0).real().cast<cplx>();
        out.col(c) = r.pack();
    }
    return out;
}

Vec HarmonicBalance::nu_derivative(const LoopState& x) const {
    LoopState d(model_.n(), l0_, x.nu());
    for (int l = 1; l <= l0_; ++l) d.coeffs().col(l) = (2.0 * x.nu() * l * l) * x.coeffs().col(l);
    return d.pack();
}

double HarmonicBalance::action(const LoopState& x) const {
    double kinetic = 0.0;
    for (int l = 1; l <= x.l0(); ++l) kinetic += double(l) * l * x.coeffs().col(l).squaredNorm();
    kinetic *= 2.0 * std::numbers::pi * x.nu() * x.nu();

    const Mat q = samples(x).array() + model_.a();
    const double v0 = model_.potential(model_.equilibrium_vector());
    double pot = 0.0;
    for (int m = 0; m < grid_; ++m) pot += model_.potential(q.col(m)) - v0;
    pot *= 2.0 * std::numbers::pi / grid_;
    return kinetic - pot;
}

ResidualReport residual(const LatticeModel& model, const LoopState& x) {
    return HarmonicBalance(model, x.l0()).residual(x);
}

// ---------------------------------------------------------------------------
// Bases and solvers

namespace {

/// Orthonormal basis of the zero-sum subspace of R^n (Helmert contrasts).
Mat zero_sum_block(int n) {
    Mat h = Mat::Zero(n, n - 1);
    for (int k = 1; k < n; ++k) {
        const double s = 1.0 / std::sqrt(double(k) * (k + 1));
        for (int j = 0; j < k; ++j) h(j, k - 1) = s;
        h(k, k - 1) = -k * s;
    }
    return h;
}

}  // namespace

Mat harmonic_basis(const LatticeModel& model, int l0, const std::vector<int>& harmonics) {
    const int n = model.n();
    const int size = n * (2 * l0 + 1);
    const bool zm = model.zero_mean_mode();
    const Mat block = zm ? zero_sum_block(n) : Mat::Identity(n, n);
    const int bw = static_cast<int>(block.cols());

    std::vector<int> hs = harmonics;
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    int cols = 0;
    for (int l : hs) {
        if (l < 0 || l > l0) throw PreconditionError("harmonic index out of range");
        cols += (l == 0 ? 1 : 2) * bw;
    }
    Mat b = Mat::Zero(size, cols);
    int c = 0;
    for (int l : hs) {
        const int base = LoopState::packed_index(n, l, 0);
        b.block(base, c, n, bw) = block;
        c += bw;
        if (l > 0) {
            b.block(base + n, c, n, bw) = block;
            c += bw;
        }
    }
    return b;
}

Mat complement_basis(const LatticeModel& model, int l0, const std::vector<int>& master) {
    std::vector<int> hs;
    for (int l = 0; l <= l0; ++l)
        if (std::find(master.begin(), master.end(), l) == master.end()) hs.push_back(l);
    return harmonic_basis(model, l0, hs);
}

NewtonReport newton_solve(const HarmonicBalance& hb, const LoopState& offset, const Mat& basis, Vec coords,
                          double tol, int max_iter) {
    const int n = hb.model().n();
    const int l0 = hb.l0();
    const double nu = offset.nu();
    auto state = [&](const Vec& c) { return offset + LoopState::unpack(basis * c, n, l0, nu); };
    auto reduced = [&](const LoopState& x) -> Vec { return basis.transpose() * hb.residual_packed(x); };

    NewtonReport rep;
    LoopState x = state(coords);
    Vec g = reduced(x);
    double r = g.norm();
    for (int it = 0; it < max_iter; ++it) {
        if (r <= tol) {
            rep.converged = true;
            break;
        }
        const Mat jac = basis.transpose() * hb.jacobian(x, basis);
        const Vec step = jac.partialPivLu().solve(-g);
        if (!step.allFinite()) break;
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 12; ++bt) {
            const Vec trial = coords + lambda * step;
            try {
                LoopState xt = state(trial);
                Vec gt = reduced(xt);
                const double rt = gt.norm();
                if (std::isfinite(rt) && (rt < r || rt <= tol)) {
                    coords = trial;
                    x = std::move(xt);
                    g = std::move(gt);
                    r = rt;
                    accepted = true;
                    break;
                }
            } catch (const SolverError&) {
            }
            lambda *= 0.5;
        }
        rep.iterations = it + 1;
        if (!accepted) break;
    }
    if (r <= tol) rep.converged = true;
    rep.coords = std::move(coords);
    rep.residual = r;
    return rep;
}

SlaveResult solve_slave(const HarmonicBalance& hb, const LoopState& master, const Mat* slave_basis,
                        const LoopState* warm_start, double tol, int max_iter) {
    if (master.nu() <= 0.0) throw PreconditionError("slave solve needs nu > 0");
    Mat owned;
    if (!slave_basis) {
        owned = complement_basis(hb.model(), hb.l0());
        slave_basis = &owned;
    }
    const Mat& b = *slave_basis;
    Vec c0 = Vec::Zero(b.cols());
    if (warm_start) c0 = b.transpose() * warm_start->pack();

    NewtonReport nr = newton_solve(hb, master, b, c0, tol, max_iter);
    if (!nr.converged && warm_start) nr = newton_solve(hb, master, b, Vec::Zero(b.cols()), tol, max_iter);
    if (!nr.converged)
        throw SolverError("slave Newton diverged (residual " + std::to_string(nr.residual) + ")");

    SlaveResult res;
    res.tail = LoopState::unpack(b * nr.coords, master.n(), master.l0(), master.nu());
    res.total = master + res.tail;
    res.iterations = nr.iterations;
    res.residual = nr.residual;
    return res;
}

TruncationChoice choose_truncation(const std::function<LoopState(int)>& solve_at, double tail_tol, int l_min,
                                   int l_max) {
    if (!(tail_tol > 0.0)) throw PreconditionError("tail tolerance must be positive (0 is unreachable)");
    if (l_min < 1 || l_max < l_min) throw PreconditionError("invalid truncation bounds");
    int l0 = l_min;
    while (true) {
        LoopState x = solve_at(l0);
        if (x.tail_fraction(2) < tail_tol) return {l0, std::move(x)};
        if (l0 == l_max) break;
        l0 = std::min(l_max, std::max(l0 + 1, (3 * l0 + 1) / 2));
    }
    throw TruncationError("harmonic cutoff exhausted at l0 = " + std::to_string(l_max));
}

}  // namespace ringwave
