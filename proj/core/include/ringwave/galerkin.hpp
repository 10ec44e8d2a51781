#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ringwave/lattice.hpp"

namespace ringwave {

/// Truncated Fourier representation of a real 2*pi-periodic loop x(t) in R^n,
///
///     x(t) = sum_{|l| <= l0} X_l e^{i l t},   X_{-l} = conj(X_l),
///
/// together with the frequency nu (the physical orbit is q(t) = a + x(nu t)).
///
/// Packed real coordinates, used by every solver in the library, are
/// [X_0 (n), Re X_1 (n), Im X_1 (n), ..., Re X_l0 (n), Im X_l0 (n)].
class LoopState {
public:
    LoopState() = default;
    LoopState(int n, int l0, double nu);

    int n() const { return n_; }
    int l0() const { return l0_; }
    double nu() const { return nu_; }
    void set_nu(double nu) { nu_ = nu; }

    /// n x (l0 + 1); column l holds X_l. Column 0 must stay real.
    CMat& coeffs() { return coeffs_; }
    const CMat& coeffs() const { return coeffs_; }
    std::complex<double> coeff(int l, int j) const { return coeffs_(j, l); }

    int packed_size() const { return n_ * (2 * l0_ + 1); }
    Vec pack() const;
    static LoopState unpack(const Vec& packed, int n, int l0, double nu);
    /// Index of Re X_{l,j} (or X_{0,j}) in packed coordinates; imaginary part follows at +n.
    static int packed_index(int n, int l, int j) { return l == 0 ? j : n * (2 * l - 1) + j; }

    /// x_j(t) and its time derivative by direct trigonometric summation.
    double value(int j, double t) const;
    double derivative(int j, double t) const;
    Vec value(double t) const;
    Vec derivative(double t) const;

    /// sqrt(|X_0|^2 + 2 sum_{l>=1} |X_l|^2): the mean-square norm of the samples.
    double l2_norm() const;
    /// sqrt(sum_{|l|<=l0} (1 + l^2) |X_l|^2).
    double sobolev_norm() const;
    /// Share of l2_norm carried by the top `top` harmonics.
    double tail_fraction(int top = 2) const;

    /// Zero-padded or truncated copy with a new harmonic cutoff.
    LoopState resized(int l0) const;

    LoopState& operator+=(const LoopState& other);
    LoopState& operator*=(double s);

private:
    int n_ = 0;
    int l0_ = 0;
    double nu_ = 0.0;
    CMat coeffs_;
};

LoopState operator+(LoopState a, const LoopState& b);
LoopState operator-(LoopState a, const LoopState& b);
LoopState operator*(double s, LoopState a);

/// JSON interchange: {"n", "l0", "nu", "re": [[...]], "im": [[...]]}, arrays indexed [l][j].
/// An optional "meta" object is accepted and ignored on input.
std::string loop_to_json(const LoopState& x, std::string_view meta_json = {});
LoopState loop_from_json(std::string_view text);

/// Smallest even size >= m whose prime factors are 2, 3 and 5.
int nice_fft_size(int m);

struct ResidualReport {
    CMat coeffs;                     // F_l for l = 0..l0, same shape as LoopState::coeffs
    double total = 0.0;              // L2 norm (same weighting as LoopState::l2_norm)
    std::vector<double> per_harmonic;
    double tail = 0.0;               // harmonics l > l0 - 2
    double discarded = 0.0;          // nonlinear-term content in l0 < l < N/2, lost to truncation
};

/// Harmonic-balance discretisation of f(x; nu) = -nu^2 x'' - grad V(a + x) on
/// N = nice_fft_size(4 l0 + 2) equispaced time samples.
///
/// Instances cache FFT plans and are not safe for concurrent use; create one per thread.
class HarmonicBalance {
public:
    HarmonicBalance(const LatticeModel& model, int l0);
    ~HarmonicBalance();
    HarmonicBalance(HarmonicBalance&&) noexcept;
    HarmonicBalance& operator=(HarmonicBalance&&) noexcept;

    const LatticeModel& model() const { return model_; }
    int l0() const { return l0_; }
    int grid_size() const { return grid_; }
    int packed_size() const { return model_.n() * (2 * l0_ + 1); }

    /// n x N matrix of x(t_m), t_m = 2 pi m / N.
    Mat samples(const LoopState& x) const;
    /// Fourier coefficients l = 0..l0 of real samples (n x N).
    CMat coefficients(const Mat& samples, int l_max) const;

    ResidualReport residual(const LoopState& x) const;
    /// Packed residual vector.
    Vec residual_packed(const LoopState& x) const;
    /// (l nu)^2 Y_l - [D^2 V(a + x) y]_l.
    LoopState jacobian_action(const LoopState& x, const LoopState& y) const;
    /// Packed Jacobian applied to each column of `basis` (packed_size x d).
    Mat jacobian(const LoopState& x, const Mat& basis) const;
    /// Packed dF/dnu = 2 nu l^2 X_l.
    Vec nu_derivative(const LoopState& x) const;

    /// F(x) = int_0^{2 pi} (nu^2 |x'|^2 / 2 - V(a + x) + V(a)) dt.
    double action(const LoopState& x) const;

    LoopState zero(double nu) const { return LoopState(model_.n(), l0_, nu); }

private:
    struct Fft;
    LatticeModel model_;
    int l0_;
    int grid_;
    std::unique_ptr<Fft> fft_;
};

ResidualReport residual(const LatticeModel& model, const LoopState& x);

/// Packed coordinates of every harmonic except those in `master` (default: all l != 1),
/// with the constant spatial mode removed when the model uses zero_mean_mode.
Mat complement_basis(const LatticeModel& model, int l0, const std::vector<int>& master = {1});

/// Packed coordinates of the listed harmonics (zero-mean aware).
Mat harmonic_basis(const LatticeModel& model, int l0, const std::vector<int>& harmonics);

struct NewtonReport {
    Vec coords;
    int iterations = 0;
    double residual = 0.0;  // packed norm of basis^T F at the returned point
    bool converged = false;
};

/// Newton on basis^T F(offset + basis * c) = 0 with residual backtracking.
NewtonReport newton_solve(const HarmonicBalance& hb, const LoopState& offset, const Mat& basis, Vec coords,
                          double tol = 1e-11, int max_iter = 30);

struct SlaveResult {
    LoopState total;   // master + tail
    LoopState tail;    // harmonics solved for
    int iterations = 0;
    double residual = 0.0;
};

/// Solves the complementary harmonics with the master part held fixed.
/// `slave_basis` defaults to complement_basis(model, l0); pass a symmetry-restricted
/// basis to solve inside a fixed-point space. Throws SolverError on divergence.
SlaveResult solve_slave(const HarmonicBalance& hb, const LoopState& master, const Mat* slave_basis = nullptr,
                        const LoopState* warm_start = nullptr, double tol = 1e-11, int max_iter = 30);

struct TruncationChoice {
    int l0 = 0;
    LoopState loop;
};

/// Grows l0 geometrically (x1.5) from l_min until the converged loop's top two harmonics
/// carry less than tail_tol of its norm. Throws PreconditionError for tail_tol <= 0 and
/// TruncationError when l_max is exhausted.
TruncationChoice choose_truncation(const std::function<LoopState(int)>& solve_at, double tail_tol, int l_min = 4,
                                   int l_max = 128);

}  // namespace ringwave
