#include "ringwave/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "ringwave/errors.hpp"

namespace ringwave {

namespace {

int mod(int a, int m) { return ((a % m) + m) % m; }

int spatial_index(const GroupElement& g, int j) { return mod((g.reflect ? -j : j) + g.shift, g.n); }

/// cos and sin of l * phase * pi / n, exact at multiples of pi / 2.
std::pair<double, double> rotation(const GroupElement& g, int l) {
    const int twice_n = 2 * g.n;
    const int r = mod(l * g.phase, twice_n);
    if (r == 0) return {1.0, 0.0};
    if (2 * r == twice_n) return {-1.0, 0.0};
    if (4 * r == twice_n) return {0.0, 1.0};
    if (4 * r == 3 * twice_n) return {0.0, -1.0};
    const double th = r * std::numbers::pi / g.n;
    return {std::cos(th), std::sin(th)};
}

int modular_inverse(int a, int m) {
    for (int x = 1; x < m; ++x)
        if (mod(a * x, m) == 1) return x;
    throw PreconditionError(fmt::format("{} has no inverse mod {}", a, m));
}

}  // namespace

// ---------------------------------------------------------------------------
// GroupElement

GroupElement GroupElement::make(int n, bool reflect, int shift, int phase, bool reverse, bool negate) {
    if (n < 1) throw PreconditionError("group element needs n >= 1");
    return {n, reflect, mod(shift, n), mod(phase, 2 * n), reverse, negate};
}

double GroupElement::angle() const { return phase * std::numbers::pi / n; }

GroupElement GroupElement::inverse() const {
    return make(n, reflect, reflect ? shift : -shift, reverse ? phase : -phase, reverse, negate);
}

bool GroupElement::operator<(const GroupElement& o) const {
    return std::tie(reflect, shift, phase, reverse, negate) < std::tie(o.reflect, o.shift, o.phase, o.reverse, o.negate);
}

std::string GroupElement::str() const {
    return fmt::format("({}j->{}j{:+d}, phi={}pi/{}{})", negate ? "-x, " : "", reflect ? "-" : "", shift, phase, n,
                       reverse ? ", reversed" : "");
}

GroupElement operator*(const GroupElement& g, const GroupElement& h) {
    if (g.n != h.n) throw PreconditionError("group elements act on different rings");
    const int sh = h.reflect ? -1 : 1;
    return GroupElement::make(g.n, g.reflect != h.reflect, sh * g.shift + h.shift,
                              g.phase + (g.reverse ? -h.phase : h.phase), g.reverse != h.reverse,
                              g.negate != h.negate);
}

LoopState act(const GroupElement& g, const LoopState& x) {
    if (g.n != x.n()) throw PreconditionError("group element and loop have different n");
    LoopState out(x.n(), x.l0(), x.nu());
    for (int l = 0; l <= x.l0(); ++l) {
        const auto [c, s] = rotation(g, l);
        const std::complex<double> rot = (g.negate ? -1.0 : 1.0) * std::complex<double>(c, s);
        for (int j = 0; j < x.n(); ++j) {
            std::complex<double> v = x.coeff(l, spatial_index(g, j));
            if (g.reverse) v = std::conj(v);
            out.coeffs()(j, l) = l == 0 ? (g.negate ? -v : v) : rot * v;
        }
    }
    return out;
}

Mat action_block(const GroupElement& g, int l) {
    const int n = g.n;
    if (l == 0) {
        Mat m = Mat::Zero(n, n);
        for (int j = 0; j < n; ++j) m(j, spatial_index(g, j)) = g.negate ? -1.0 : 1.0;
        return m;
    }
    auto [c, s] = rotation(g, l);
    if (g.negate) {
        c = -c;
        s = -s;
    }
    const double sign = g.reverse ? -1.0 : 1.0;
    Mat m = Mat::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        const int i = spatial_index(g, j);
        // (a, b) -> rotate (a, sign b)
        m(j, i) = c;
        m(j, n + i) = -s * sign;
        m(n + j, i) = s;
        m(n + j, n + i) = c * sign;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Isotropy groups

std::string to_string(IsotropyLabel label) {
    switch (label) {
        case IsotropyLabel::T: return "T";
        case IsotropyLabel::S: return "S";
        case IsotropyLabel::St: return "St";
        case IsotropyLabel::SGlobal: return "S_global";
        case IsotropyLabel::StGlobal: return "St_global";
        case IsotropyLabel::Full: return "Full";
    }
    return "?";
}

IsotropyLabel parse_isotropy_label(const std::string& s) {
    if (s == "T") return IsotropyLabel::T;
    if (s == "S") return IsotropyLabel::S;
    if (s == "St" || s == "S~") return IsotropyLabel::St;
    if (s == "S_global") return IsotropyLabel::SGlobal;
    if (s == "St_global" || s == "S~_global") return IsotropyLabel::StGlobal;
    if (s == "Full") return IsotropyLabel::Full;
    throw ConfigError("unknown isotropy label '" + s + "' (expected T, S, St, S_global, St_global or Full)");
}

std::string IsotropyGroup::name() const {
    switch (label) {
        case IsotropyLabel::T:
        case IsotropyLabel::S:
        case IsotropyLabel::St: return to_string(label) + "_" + std::to_string(k);
        case IsotropyLabel::SGlobal: return "S";
        case IsotropyLabel::StGlobal: return "St";
        case IsotropyLabel::Full: return "Full";
    }
    return "?";
}

std::vector<GroupElement> enumerate_group(int n, const std::vector<GroupElement>& generators) {
    std::set<GroupElement> seen{GroupElement::identity(n)};
    std::deque<GroupElement> queue{GroupElement::identity(n)};
    const std::size_t bound = 4u * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    while (!queue.empty()) {
        const GroupElement e = queue.front();
        queue.pop_front();
        for (const auto& g : generators) {
            const GroupElement p = e * g;
            if (seen.insert(p).second) queue.push_back(p);
        }
        if (seen.size() > bound) throw SymmetryError("group closure exceeded 4 n^2 elements");
    }
    return {seen.begin(), seen.end()};
}

IsotropyGroup build_isotropy(IsotropyLabel label, int n, int k, bool signed_reflection) {
    if (n < 3) throw PreconditionError("isotropy groups need n >= 3");
    IsotropyGroup H;
    H.label = label;
    H.n = n;
    H.signed_reflection = signed_reflection;
    auto el = [n, signed_reflection](bool reflect, int shift, int phase, bool reverse) {
        const bool twist = reflect && signed_reflection;
        return GroupElement::make(n, reflect, shift, twist ? phase + n : phase, reverse, twist);
    };
    const GroupElement kappa = el(true, 0, 0, false);
    const GroupElement kappa_bar = el(false, 0, 0, true);

    const bool modal = label == IsotropyLabel::T || label == IsotropyLabel::S || label == IsotropyLabel::St;
    if (modal) {
        if (!((k >= 1 && 2 * k <= n) || k == n))
            throw PreconditionError(fmt::format("mode k = {} outside [1, n/2] and not n (n = {})", k, n));
        H.k = k;
        H.h = std::gcd(k, n);
        H.kbar = k / H.h;
        H.nbar = n / H.h;
        if (H.nbar % 2 == 0) H.m = modular_inverse(H.kbar % H.nbar, H.nbar);
    }

    switch (label) {
        case IsotropyLabel::T:
            if (k == n)
                H.generators = {el(false, 1, 0, false), kappa, kappa_bar};
            else if (2 * k == n)
                H.generators = {el(false, 1, n, false), kappa, kappa_bar};
            else
                H.generators = {el(false, 1, -2 * k, false), el(true, 0, 0, true), el(false, H.nbar, 0, false)};
            break;
        case IsotropyLabel::S:
            H.generators = {kappa, kappa_bar, el(false, H.nbar, 0, false)};
            if (H.nbar % 2 == 0) H.generators.push_back(el(false, H.nbar * H.m / 2, n, false));
            break;
        case IsotropyLabel::St:
            if (H.nbar % 2 == 1)
                H.generators = {el(true, 0, n, false), el(false, 0, n, true), el(false, H.nbar, 0, false)};
            else
                H.generators = {el(true, H.m, 0, false), el(false, 0, 2 * H.h, true),
                                el(false, H.nbar * H.m / 2, n, false), el(false, H.nbar, 0, false)};
            break;
        case IsotropyLabel::SGlobal:
            H.generators = {kappa, kappa_bar};
            break;
        case IsotropyLabel::StGlobal:
            if (n % 2 == 1)
                H.generators = {el(true, 0, n, false), el(false, 0, n, true)};
            else
                H.generators = {el(true, 1, 0, false), el(false, 0, 2, true)};
            break;
        case IsotropyLabel::Full:
            break;
    }
    H.elements = enumerate_group(n, H.generators);
    return H;
}

IsotropyGroup build_isotropy(const LatticeModel& model, IsotropyLabel label, int k) {
    const Reflection refl = model.reflection();
    if (refl == Reflection::Broken && label != IsotropyLabel::Full)
        throw SymmetryError("the ring reflection is not a symmetry of this model (W and U(a + .) both uneven)");
    return build_isotropy(label, model.n(), k, refl == Reflection::Signed);
}

void require_equivariant(const LatticeModel& model, const IsotropyGroup& H) {
    if (H.n != model.n()) throw PreconditionError("group and model have different n");
    const bool u_even = model.onsite().is_even_about(model.a());
    const bool w_even = model.coupling().is_even_about(0.0);
    for (const auto& g : H.generators) {
        // x -> -x needs U even about a; an unsigned reflection needs W even.
        const bool ok = (!g.negate || u_even) && (!g.reflect || g.negate || w_even);
        if (!ok) throw SymmetryError(fmt::format("{} in {} is not a symmetry of this model", g.str(), H.name()));
    }
}

// ---------------------------------------------------------------------------
// Fixed spaces

Mat projector_block(const IsotropyGroup& H, int l) {
    const int size = l == 0 ? H.n : 2 * H.n;
    Mat p = Mat::Zero(size, size);
    for (const auto& g : H.elements) p += action_block(g, l);
    return p / static_cast<double>(H.elements.size());
}

FixedSpaceBasis fixed_space(const IsotropyGroup& H, int l0, std::vector<int> harmonics, bool zero_mean) {
    const int n = H.n;
    if (l0 < 1) throw PreconditionError("fixed_space needs l0 >= 1");
    if (harmonics.empty()) {
        harmonics.resize(static_cast<std::size_t>(l0 + 1));
        std::iota(harmonics.begin(), harmonics.end(), 0);
    }
    std::sort(harmonics.begin(), harmonics.end());
    harmonics.erase(std::unique(harmonics.begin(), harmonics.end()), harmonics.end());

    FixedSpaceBasis out;
    out.l0 = l0;
    out.harmonics = harmonics;
    std::vector<Mat> blocks;
    int total = 0;
    for (int l : harmonics) {
        if (l < 0 || l > l0) throw PreconditionError("harmonic index out of range");
        Mat p = projector_block(H, l);
        if (zero_mean) {
            const int size = static_cast<int>(p.rows());
            Mat z = Mat::Identity(size, size);
            for (int off = 0; off < size; off += n) z.block(off, off, n, n) -= Mat::Constant(n, n, 1.0 / n);
            p = p * z;
        }
        const double idem = (p * p - p).cwiseAbs().maxCoeff();
        if (idem > kIdempotencyTol)
            throw SymmetryError(fmt::format("projector for {} on harmonic {} is not idempotent ({:.3g})", H.name(), l, idem));
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (p + p.transpose()));
        const Vec& ev = es.eigenvalues();
        int first = static_cast<int>(ev.size());
        while (first > 0 && ev[first - 1] > kRankCutoff) --first;
        Mat b = es.eigenvectors().rightCols(ev.size() - first);
        out.block_dims.push_back(static_cast<int>(b.cols()));
        total += static_cast<int>(b.cols());
        blocks.push_back(std::move(b));
    }
    out.basis = Mat::Zero(n * (2 * l0 + 1), total);
    int c = 0;
    for (std::size_t i = 0; i < harmonics.size(); ++i) {
        const int row = LoopState::packed_index(n, harmonics[i], 0);
        const Mat& b = blocks[i];
        out.basis.block(row, c, b.rows(), b.cols()) = b;
        c += static_cast<int>(b.cols());
    }
    return out;
}

int mode_block_dimension(const IsotropyGroup& H, int k) {
    const int n = H.n;
    const auto basis = circulant_basis(n);
    std::vector<int> modes{mod(k, n) == 0 ? n : mod(k, n)};
    const int other = mod(n - k, n) == 0 ? n : mod(n - k, n);
    if (other != modes[0]) modes.push_back(other);

    Mat q(2 * n, 2 * static_cast<int>(modes.size()));
    int c = 0;
    for (int kk : modes) {
        const CVec e = basis.vector(kk);
        q.col(c).head(n) = e.real();
        q.col(c++).tail(n) = e.imag();
        q.col(c).head(n) = -e.imag();
        q.col(c++).tail(n) = e.real();
    }
    const Mat m = q.transpose() * projector_block(H, 1) * q;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    int d = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > 0.5) ++d;
    return d;
}

int expected_dim_S(int n) { return n % 2 ? (n + 1) / 2 : n / 2 + 1; }
int expected_dim_St(int n) { return n % 2 ? (n - 1) / 2 : n / 2; }

// ---------------------------------------------------------------------------
// Residuals

double pattern_residual(const LoopState& x, const IsotropyGroup& H, int samples) {
    if (x.n() != H.n) throw PreconditionError("loop and group have different n");
    if (samples <= 0) samples = 4 * x.l0() + 4;
    const int n = x.n();
    Mat vals(n, samples);
    for (int m = 0; m < samples; ++m) vals.col(m) = x.value(2.0 * std::numbers::pi * m / samples);
    const double scale = vals.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;

    double worst = 0.0;
    for (const auto& g : H.generators) {
        for (int m = 0; m < samples; ++m) {
            const double t = 2.0 * std::numbers::pi * m / samples;
            const double tau = g.reverse ? -(t + g.angle()) : t + g.angle();
            const double sign = g.negate ? -1.0 : 1.0;
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, std::abs(sign * x.value(spatial_index(g, j), tau) - vals(j, m)));
        }
    }
    return worst / scale;
}

double symmetry_residual(const LoopState& x, const IsotropyGroup& H) {
    const Vec px = x.pack();
    const double norm = px.norm();
    if (norm == 0.0) return 0.0;
    double worst = 0.0;
    for (const auto& g : H.generators) worst = std::max(worst, (act(g, x).pack() - px).norm() / norm);
    return std::max(worst, pattern_residual(x, H));
}

}  // namespace ringwave
