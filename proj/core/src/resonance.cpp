#include "scr/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "scr/constants.hpp"

namespace scr {

namespace {

using cplx = std::complex<double>;

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void check_params(const ResonanceParams& p) {
    require(positive(p.f0), "f0 must be positive");
    require(positive(p.qi) && positive(p.qc), "Qi and Qc must be positive");
    require(std::isfinite(p.phi), "phi must be finite");
}

double wrap_phase(double phi) {
    phi = std::remainder(phi, 2.0 * std::numbers::pi);
    return phi <= -std::numbers::pi ? phi + 2.0 * std::numbers::pi : phi;
}

double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

// Indices of the outer 10% of samples, split evenly between both ends.
std::vector<std::size_t> outer_indices(std::size_t n) {
    const std::size_t each = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * n)));
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < each; ++i) {
        idx.push_back(i);
        idx.push_back(n - 1 - i);
    }
    return idx;
}

// Algebraic (Kasa) circle fit; returns the centre.
cplx circle_centre(const std::vector<cplx>& z) {
    const auto n = static_cast<Eigen::Index>(z.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx p = z[static_cast<std::size_t>(i)];
        a(i, 0) = p.real();
        a(i, 1) = p.imag();
        a(i, 2) = 1.0;
        b[i] = std::norm(p);
    }
    const Eigen::Vector3d s = a.colPivHouseholderQr().solve(b);
    return {0.5 * s[0], 0.5 * s[1]};
}

struct Model {
    const S21Trace& trace;
    bool with_delay;
    double f_ref;

    Eigen::Index params() const { return with_delay ? 5 : 4; }

    // theta = (f0, ln Qi, ln Qc, phi [, tau])
    void evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd& residual,
                  Eigen::MatrixXd* jacobian) const {
        const auto n = static_cast<Eigen::Index>(trace.size());
        const double f0 = theta[0];
        const double qi = std::exp(theta[1]);
        const double qc = std::exp(theta[2]);
        const cplx u = (qi / qc) * std::polar(1.0, theta[3]);
        const double tau = with_delay ? theta[4] : 0.0;

        residual.resize(2 * n);
        if (jacobian != nullptr) {
            jacobian->resize(2 * n, params());
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double f = trace.frequencies[static_cast<std::size_t>(i)];
            const cplx w(1.0, 2.0 * qi * (f - f0) / f0);
            const cplx a = u / w;
            const cplx s = 1.0 / (1.0 + a);
            const cplx rot = with_delay ? std::polar(1.0, kTwoPi * (f - f_ref) * tau) : cplx(1.0);
            const cplx model = s * rot;
            const cplx diff = model - trace.values[static_cast<std::size_t>(i)];
            residual[2 * i] = diff.real();
            residual[2 * i + 1] = diff.imag();
            if (jacobian == nullptr) {
                continue;
            }
            const cplx ds_da = -s * s * rot;
            const cplx aw = a / w;
            const cplx cols[5] = {
                ds_da * aw * cplx(0.0, 2.0 * qi * f / (f0 * f0)),
                ds_da * aw,
                ds_da * -a,
                ds_da * cplx(0.0, 1.0) * a,
                model * cplx(0.0, kTwoPi * (f - f_ref)),
            };
            for (Eigen::Index k = 0; k < params(); ++k) {
                (*jacobian)(2 * i, k) = cols[k].real();
                (*jacobian)(2 * i + 1, k) = cols[k].imag();
            }
        }
    }
};

ResonanceFit to_fit(const Eigen::VectorXd& theta, const Eigen::MatrixXd& jac, double ssr,
                    std::size_t samples, int iterations, bool with_delay) {
    ResonanceFit fit;
    fit.params.f0 = theta[0];
    fit.params.qi = std::exp(theta[1]);
    fit.params.qc = std::exp(theta[2]);
    fit.params.phi = wrap_phase(theta[3]);
    fit.delay = with_delay ? theta[4] : 0.0;
    fit.residual_rms = std::sqrt(ssr / static_cast<double>(samples));
    fit.iterations = iterations;

    const double dof = 2.0 * static_cast<double>(samples) - static_cast<double>(theta.size());
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(jtj);
    if (dof > 0.0 && ldlt.info() == Eigen::Success) {
        const Eigen::MatrixXd cov =
            (ssr / dof) * ldlt.solve(Eigen::MatrixXd::Identity(jtj.rows(), jtj.cols()));
        const auto sigma = [&](Eigen::Index k) { return std::sqrt(std::max(cov(k, k), 0.0)); };
        fit.uncertainty.f0 = sigma(0);
        fit.uncertainty.qi = fit.params.qi * sigma(1);
        fit.uncertainty.qc = fit.params.qc * sigma(2);
        fit.uncertainty.phi = sigma(3);
        if (with_delay) {
            fit.delay_uncertainty = sigma(4);
        }
    }
    return fit;
}

}  // namespace

void S21Trace::validate() const {
    if (frequencies.size() != values.size()) {
        throw ValidationError("trace frequency and value columns differ in length");
    }
    if (frequencies.size() < kMinTraceSamples) {
        std::ostringstream msg;
        msg << "trace has " << frequencies.size() << " samples, need at least "
            << kMinTraceSamples;
        throw ValidationError(msg.str());
    }
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (!std::isfinite(frequencies[i]) || !std::isfinite(values[i].real()) ||
            !std::isfinite(values[i].imag())) {
            throw ValidationError("trace sample " + std::to_string(i) + " is not finite");
        }
        if (i > 0 && !(frequencies[i] > frequencies[i - 1])) {
            throw ValidationError("trace frequencies not strictly increasing at sample " +
                                  std::to_string(i));
        }
    }
    if (power_in && !positive(*power_in)) {
        throw ValidationError("trace input power must be positive");
    }
}

cplx s21_model(double f, const ResonanceParams& params) {
    const cplx w(1.0, 2.0 * params.qi * (f - params.f0) / params.f0);
    return 1.0 / (1.0 + (params.qi / params.qc) * std::polar(1.0, params.phi) / w);
}

S21Trace synth_trace(const ResonanceParams& params, double span, std::size_t n_points,
                     double noise_rms, std::uint64_t seed) {
    check_params(params);
    require(positive(span), "span must be positive");
    require(n_points >= kMinTraceSamples, "synthetic trace needs at least 32 points");
    require(std::isfinite(noise_rms) && noise_rms >= 0.0, "noise RMS must be non-negative");
    require(span < 2.0 * params.f0, "span must leave all frequencies positive");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise_rms > 0.0 ? noise_rms / std::numbers::sqrt2 : 1.0);

    S21Trace trace;
    trace.frequencies.resize(n_points);
    trace.values.resize(n_points);
    const double start = params.f0 - 0.5 * span;
    const double step = span / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double f = start + step * static_cast<double>(i);
        trace.frequencies[i] = f;
        cplx v = s21_model(f, params);
        if (noise_rms > 0.0) {
            const double re = normal(rng);
            const double im = normal(rng);
            v += cplx(re, im);
        }
        trace.values[i] = v;
    }
    return trace;
}

S21Trace normalize_baseline(const S21Trace& trace) {
    trace.validate();
    std::vector<double> magnitudes;
    cplx sum = 0.0;
    for (std::size_t i : outer_indices(trace.size())) {
        magnitudes.push_back(std::abs(trace.values[i]));
        sum += trace.values[i];
    }
    const double mag = median(std::move(magnitudes));
    if (!(mag > 0.0) || std::abs(sum) == 0.0) {
        throw ComputationError(ErrorKind::no_resonance, "trace baseline is zero");
    }
    const cplx baseline = std::polar(mag, std::arg(sum));

    S21Trace out = trace;
    for (auto& v : out.values) {
        v /= baseline;
    }
    return out;
}

ResonanceParams estimate_resonance(const S21Trace& trace) {
    trace.validate();
    const std::size_t n = trace.size();

    std::vector<double> outer;
    for (std::size_t i : outer_indices(n)) {
        outer.push_back(std::abs(trace.values[i]));
    }
    const double baseline = median(std::move(outer));

    std::size_t imin = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(trace.values[i]) < std::abs(trace.values[imin])) {
            imin = i;
        }
    }
    const double smin = std::abs(trace.values[imin]);
    if (!(smin < 0.99 * baseline)) {
        throw ComputationError(ErrorKind::no_resonance,
                               "no resonance dip found (minimum |S21| above 99% of baseline)");
    }

    ResonanceParams p;
    p.f0 = trace.frequencies[imin];
    const double ratio = std::max(baseline / std::max(smin, 1e-12 * baseline) - 1.0, 1e-6);

    // Loaded Q from the full width at half maximum of |1 - S21|^2.
    std::vector<double> depth(n);
    for (std::size_t i = 0; i < n; ++i) {
        depth[i] = std::norm(1.0 - trace.values[i] / baseline);
    }
    const double half = 0.5 * depth[imin];
    const auto crossing = [&](int dir) {
        std::size_t i = imin;
        while (true) {
            const std::size_t next = dir > 0 ? i + 1 : i - 1;
            if ((dir > 0 && next >= n) || (dir < 0 && i == 0)) {
                return trace.frequencies[i];
            }
            if (depth[next] < half) {
                const double t = (depth[i] - half) / (depth[i] - depth[next]);
                return trace.frequencies[i] + t * (trace.frequencies[next] - trace.frequencies[i]);
            }
            i = next;
        }
    };
    const double width = std::max(crossing(+1) - crossing(-1),
                                  trace.frequencies[1] - trace.frequencies[0]);
    const double q_loaded = p.f0 / width;
    p.qi = q_loaded * (1.0 + ratio);
    p.qc = p.qi / ratio;

    // 1/S21 traces a circle centred at 1 + (Qi/Qc) e^{i phi} / 2.
    std::vector<cplx> inverse;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(trace.values[i]) > 1e-12) {
            inverse.push_back(baseline / trace.values[i]);
        }
    }
    p.phi = wrap_phase(std::arg(circle_centre(inverse) - 1.0));
    return p;
}

ResonanceFit fit_resonance(const S21Trace& input, const FitOptions& options) {
    input.validate();
    require(options.max_iterations > 0, "max_iterations must be positive");
    require(positive(options.step_tolerance), "step tolerance must be positive");
    const S21Trace trace = options.normalize_baseline ? normalize_baseline(input) : input;

    const ResonanceParams init = options.init ? *options.init : estimate_resonance(trace);
    check_params(init);

    const Model model{trace, options.fit_delay,
                      0.5 * (trace.frequencies.front() + trace.frequencies.back())};
    Eigen::VectorXd theta(5);
    theta << init.f0, std::log(init.qi), std::log(init.qc), init.phi, 0.0;
    if (!options.fit_delay) {
        theta.conservativeResize(4);
    }

    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    model.evaluate(theta, r, &jac);
    double ssr = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    for (; iter < options.max_iterations && !converged; ++iter) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        const Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-300);

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * diag;
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            Eigen::VectorXd trial = theta + step;
            if (!trial.allFinite() || !(trial[0] > 0.0)) {
                lambda *= 10.0;
            } else {
                Eigen::VectorXd r_trial;
                model.evaluate(trial, r_trial, nullptr);
                const double ssr_trial = r_trial.squaredNorm();
                if (ssr_trial <= ssr) {
                    bool small = true;
                    const double scales[5] = {theta[0], 1.0, 1.0, 1.0, 1.0 / theta[0]};
                    for (Eigen::Index k = 0; k < step.size(); ++k) {
                        if (std::abs(step[k]) > options.step_tolerance * scales[k]) {
                            small = false;
                        }
                    }
                    theta = std::move(trial);
                    ssr = ssr_trial;
                    model.evaluate(theta, r, &jac);
                    lambda = std::max(lambda / 10.0, 1e-12);
                    accepted = true;
                    converged = small;
                } else {
                    lambda *= 10.0;
                }
            }
            if (!accepted && lambda > 1e16) {
                // No descent direction left at working precision: a minimum.
                converged = true;
                break;
            }
        }
    }

    ResonanceFit fit = to_fit(theta, jac, ssr, trace.size(), iter, options.fit_delay);
    if (!converged) {
        throw FitConvergenceError("resonance fit did not converge in " +
                                      std::to_string(options.max_iterations) + " iterations",
                                  fit);
    }
    if (fit.params.f0 < trace.frequencies.front() || fit.params.f0 > trace.frequencies.back()) {
        throw FitConvergenceError("fitted f0 lies outside the trace span", fit);
    }
    return fit;
}

std::optional<double> qc_from_circuit(double z_res, double z0, double c_ca, double c_cb,
                                      ModeLabel mode, double f0) {
    require(positive(z_res) && positive(z0) && positive(f0),
            "impedances and frequency must be positive");
    require(std::isfinite(c_ca) && std::isfinite(c_cb) && c_ca >= 0.0 && c_cb >= 0.0,
            "feedline capacitances must be non-negative");
    require(mode != ModeLabel::electron_like, "coupling Q is defined for circuit modes only");

    const double c_c = mode == ModeLabel::common ? 0.5 * (c_ca + c_cb) : 0.5 * (c_ca - c_cb);
    if (c_c == 0.0) {
        return std::nullopt;
    }
    const double omega = kTwoPi * f0;
    return 1.0 / (z_res * z0 * c_c * c_c * omega * omega);
}

double photon_number(double p_in, const ResonanceParams& params) {
    require(positive(p_in), "input power must be positive");
    check_params(params);
    const double omega = kTwoPi * params.f0;
    const double ratio = params.qi / (params.qi + params.qc);
    return p_in * params.qc / (kCodata2018.hbar * omega * omega) * ratio * ratio;
}

double dbm_to_watts(double dbm) {
    require(std::isfinite(dbm), "power must be finite");
    return 1e-3 * std::pow(10.0, dbm / 10.0);
}

}  // namespace scr
