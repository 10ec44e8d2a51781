#include "ringwave/timedomain.hpp"

#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "ringwave/errors.hpp"

namespace ringwave {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

double hamiltonian(const LatticeModel& model, const Vec& q, const Vec& p) {
    return 0.5 * p.squaredNorm() + model.potential(q);
}

struct Recorder {
    const LatticeModel& model;
    TrajectorySample& out;
    int n;

    void operator()(const State& s, double t) const {
        Vec q = Eigen::Map<const Vec>(s.data(), n);
        Vec p = Eigen::Map<const Vec>(s.data() + n, n);
        if (!q.allFinite() || !p.allFinite()) throw IntegrationError("non-finite state at t = " + std::to_string(t));
        out.times.push_back(t);
        out.energy.push_back(hamiltonian(model, q, p));
        out.q.push_back(std::move(q));
        out.p.push_back(std::move(p));
    }
};

}  // namespace

std::vector<double> uniform_times(double duration, int count) {
    if (count < 1 || !(duration >= 0.0)) throw PreconditionError("uniform_times needs count >= 1 and duration >= 0");
    std::vector<double> t(static_cast<std::size_t>(count) + 1);
    for (int i = 0; i <= count; ++i) t[static_cast<std::size_t>(i)] = duration * i / count;
    return t;
}

TrajectorySample integrate(const LatticeModel& model, const Vec& q0, const Vec& p0, const std::vector<double>& times,
                           const IntegrateOptions& opts) {
    const int n = model.n();
    if (q0.size() != n || p0.size() != n) throw PreconditionError("initial data must have length n");
    if (!q0.allFinite() || !p0.allFinite()) throw PreconditionError("initial data must be finite");
    if (times.empty() || times.front() < 0.0 || !std::is_sorted(times.begin(), times.end()))
        throw PreconditionError("output times must be non-empty, ascending and non-negative");

    TrajectorySample out;
    Recorder rec{model, out, n};
    State s(static_cast<std::size_t>(2 * n));
    std::copy(q0.data(), q0.data() + n, s.begin());
    std::copy(p0.data(), p0.data() + n, s.begin() + n);

    auto rhs = [&](const State& x, State& dx, double) {
        const Eigen::Map<const Vec> q(x.data(), n);
        const Vec g = model.grad_V(q);
        for (int j = 0; j < n; ++j) {
            dx[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(n + j)];
            dx[static_cast<std::size_t>(n + j)] = -g[j];
        }
    };

    std::vector<double> t_all{0.0};
    for (double t : times)
        if (t > 0.0) t_all.push_back(t);
    const bool record_zero = times.front() == 0.0;

    try {
        if (opts.method == Integrator::Symplectic) {
            State q(s.begin(), s.begin() + n), p(s.begin() + n, s.end());
            auto force = [&](const State& qq, State& dp) {
                const Vec g = model.grad_V(Eigen::Map<const Vec>(qq.data(), n));
                for (int j = 0; j < n; ++j) dp[static_cast<std::size_t>(j)] = -g[j];
            };
            auto velocity = [](const State& pp, State& dq) { dq = pp; };
            odeint::symplectic_rkn_sb3a_mclachlan<State> stepper;
            double t = 0.0;
            State joined(s.size());
            auto record = [&](double time) {
                std::copy(q.begin(), q.end(), joined.begin());
                std::copy(p.begin(), p.end(), joined.begin() + n);
                rec(joined, time);
            };
            if (record_zero) record(0.0);
            for (std::size_t i = 1; i < t_all.size(); ++i) {
                const double target = t_all[i];
                while (t < target - 1e-15 * std::max(1.0, target)) {
                    const double h = std::min(opts.dt, target - t);
                    stepper.do_step(std::make_pair(velocity, force), std::make_pair(std::ref(q), std::ref(p)), t, h);
                    t += h;
                }
                record(target);
            }
        } else {
            std::size_t idx = 0;
            auto observer = [&](const State& x, double t) {
                if (idx++ == 0 && !record_zero) return;
                rec(x, t);
            };
            odeint::max_step_checker checker(static_cast<int>(std::min<long long>(opts.max_steps, 2'000'000'000LL)));
            if (opts.method == Integrator::DormandPrince) {
                auto stepper = odeint::make_dense_output(opts.tol, opts.tol, odeint::runge_kutta_dopri5<State>());
                odeint::integrate_times(stepper, rhs, s, t_all.begin(), t_all.end(), 1e-3, observer, checker);
            } else {
                auto stepper = odeint::make_controlled(opts.tol, opts.tol, odeint::runge_kutta_fehlberg78<State>());
                odeint::integrate_times(stepper, rhs, s, t_all.begin(), t_all.end(), 1e-3, observer, checker);
            }
        }
    } catch (const odeint::step_adjustment_error& e) {
        throw IntegrationError(std::string("step-size underflow: ") + e.what());
    } catch (const odeint::no_progress_error& e) {
        throw IntegrationError(std::string("integration stalled: ") + e.what());
    } catch (const odeint::odeint_error& e) {
        throw IntegrationError(std::string("integration failed: ") + e.what());
    } catch (const std::domain_error& e) {
        throw IntegrationError(std::string("force evaluation failed: ") + e.what());
    }

    const double h0 = hamiltonian(model, q0, p0);
    const double scale = std::max(std::abs(h0), 1e-300);
    for (double e : out.energy) out.max_energy_drift = std::max(out.max_energy_drift, std::abs(e - h0) / scale);
    return out;
}

PeriodicityReport verify_periodicity(const LatticeModel& model, const LoopState& x, const IntegrateOptions& opts,
                                     int samples, double threshold) {
    if (!(x.nu() > 0.0)) throw PreconditionError("loop frequency must be positive");
    if (x.n() != model.n()) throw PreconditionError("loop and model have different n");
    PeriodicityReport rep;
    rep.period = 2.0 * std::numbers::pi / x.nu();
    const Vec q0 = x.value(0.0).array() + model.a();
    const Vec p0 = x.nu() * x.derivative(0.0);
    const TrajectorySample tr = integrate(model, q0, p0, uniform_times(rep.period, samples), opts);

    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const Vec ref = x.value(x.nu() * tr.times[i]).array() + model.a();
        rep.max_deviation = std::max(rep.max_deviation, (tr.q[i] - ref).cwiseAbs().maxCoeff());
    }
    const Vec dq = tr.q.back() - q0;
    const Vec dp = tr.p.back() - p0;
    rep.return_distance = std::sqrt(dq.squaredNorm() + dp.squaredNorm());
    rep.energy_drift = tr.max_energy_drift;
    rep.passed = rep.return_distance <= threshold;
    return rep;
}

}  // namespace ringwave
