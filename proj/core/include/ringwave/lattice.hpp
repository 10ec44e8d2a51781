#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ringwave/potentials.hpp"

namespace ringwave {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Action of the ring reflection j -> -j under which V is invariant:
/// Plain x_j(t) -> x_{-j}(t) when W is even; Signed x_j(t) -> -x_{-j}(t + pi) when W is
/// not even but U is even about a; Broken otherwise.
enum class Reflection { Plain, Signed, Broken };

/// Cyclic chain of n oscillators with on-site potential U and nearest-neighbour
/// coupling W, linearised about the homogeneous equilibrium a.
///
/// Oscillator j is stored at index j mod n (index 0 is oscillator n).
/// Immutable after construction.
class LatticeModel {
public:
    /// Locates the equilibrium from `equilibrium_seed` with find_equilibrium.
    LatticeModel(int n, PotentialSpec onsite, PotentialSpec coupling, double equilibrium_seed = 0.0,
                 bool zero_mean_mode = false);

    int n() const { return n_; }
    const PotentialSpec& onsite() const { return onsite_; }
    const PotentialSpec& coupling() const { return coupling_; }
    double a() const { return a_; }
    bool zero_mean_mode() const { return zero_mean_; }

    /// U''(a) and W''(0).
    double onsite_curvature() const { return upp_; }
    double coupling_curvature() const { return wpp_; }

    /// V(q) = sum_j U(q_j) + W(q_j - q_{j-1}).
    double potential(const Vec& q) const;
    /// Component j: U'(q_j) + W'(q_j - q_{j-1}) - W'(q_{j+1} - q_j).
    Vec grad_V(const Vec& q) const;
    /// Dense analytic Hessian D^2 V(q).
    Mat hessian_V(const Vec& q) const;
    /// y -> D^2 V(q) y without forming the matrix.
    Vec hessian_apply(const Vec& q, const Vec& y) const;

    Vec equilibrium_vector() const { return Vec::Constant(n_, a_); }

    Reflection reflection() const;

private:
    int n_;
    PotentialSpec onsite_;
    PotentialSpec coupling_;
    double a_;
    bool zero_mean_;
    double upp_;
    double wpp_;
};

/// Dense circulant second-difference matrix (2 on the diagonal, -1 cyclically off it).
Mat second_difference_matrix(int n);

/// Eigenvectors e_k (k = 1..n, stored at column k-1) of the second-difference matrix:
/// j-th entry n^{-1/2} exp(i j k zeta), zeta = 2 pi / n, eigenvalue 4 sin^2(k pi / n).
struct CirculantBasis {
    int n = 0;
    CMat vectors;              // n x n, column k-1 holds e_k
    std::vector<double> mu;    // mu[k-1] = 4 sin^2(k pi / n)

    auto vector(int k) const { return vectors.col(k - 1); }
    double eigenvalue(int k) const { return mu[static_cast<std::size_t>(k - 1)]; }
};

CirculantBasis circulant_basis(int n);

/// 4 sin^2(k pi / n), exact 0 for k = 0 mod n.
double circulant_eigenvalue(int n, int k);

/// Coefficients x_k with x = sum_k x_k e_k (entry k-1 holds x_k).
CVec to_mode_coords(const CirculantBasis& basis, const CVec& x);
CVec from_mode_coords(const CirculantBasis& basis, const CVec& coeffs);

/// Writes a dense matrix as comma-separated rows with round-trip precision.
void write_matrix_csv(std::ostream& os, const Mat& m);

}  // namespace ringwave
