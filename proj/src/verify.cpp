#include "notfs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "notfs/detect.hpp"

namespace notfs::verify {

namespace {

using tfst::SampledSignal;
using tfst::TfstParams;

std::vector<Complex> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Complex> v(n);
    for (auto& z : v) z = Complex(g(rng), g(rng));
    return v;
}

ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    return {rows, cols, random_vector(rows * cols, rng)};
}

SampledSignal random_signal(const TfstParams& p, std::mt19937_64& rng) {
    return {random_vector(p.frame_samples(), rng), p.step(), 0.0};
}

Complex phase(double cycles) {
    const double a = 2.0 * kPi * (cycles - std::floor(cycles));
    return {std::cos(a), std::sin(a)};
}

struct Tracker {
    PropertyCheck check;
    void record(double err) {
        check.max_error = std::max(check.max_error, err);
        check.cases += 1;
    }
};

std::string label(const tfst::Rational& lambda, const tfst::Rational& mu) {
    auto r = [](const tfst::Rational& q) {
        return q.den == 1 ? std::to_string(q.num) : std::to_string(q.num) + "/" + std::to_string(q.den);
    };
    return " (lambda=" + r(lambda) + ", mu=" + r(mu) + ")";
}

}  // namespace

double relative_error(const std::vector<Complex>& a, const std::vector<Complex>& b, double floor) {
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        err = std::max(err, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    if (a.size() != b.size()) return INFINITY;
    return err / std::max(scale, floor);
}

std::vector<PropertyCheck> tfst_property_suite(
    std::size_t signals, std::uint64_t seed,
    const std::vector<std::pair<tfst::Rational, tfst::Rational>>& transform_params,
    double tolerance) {
    std::vector<PropertyCheck> out;
    for (const auto& [lambda, mu] : transform_params) {
        TfstParams p;
        p.lambda = lambda;
        p.mu = mu;
        p.T = 1.0;
        p.samples_per_T = 4;
        p.periods = 6;
        p.validate();
        const std::string tag = label(lambda, mu);
        const auto n_tau = static_cast<std::int64_t>(p.samples_per_period());
        const auto n_nu = static_cast<std::int64_t>(p.periods);
        const double lt = lambda.value() * p.T;
        const double lm = lambda.value() * mu.value();
        const std::size_t length = p.frame_samples();
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::int64_t> shift_dist(-2 * n_tau, 2 * n_tau);
        std::uniform_int_distribution<std::int64_t> dopp_dist(-n_nu, n_nu);

        Tracker quasi{{"quasi-periodicity in tau" + tag, 0, tolerance}};
        Tracker nuper{{"periodicity in nu" + tag, 0, tolerance}};
        Tracker shift{{"delay-Doppler shift" + tag, 0, tolerance}};
        Tracker mult{{"multiplication" + tag, 0, tolerance}};
        Tracker mult_sym{{"multiplication, swapped integrand" + tag, 0, tolerance}};
        Tracker conv{{"convolution" + tag, 0, tolerance}};
        Tracker conv_sym{{"convolution, swapped integrand" + tag, 0, tolerance}};
        Tracker time_inv{{"time inversion" + tag, 0, tolerance}};
        Tracker fourier{{"Fourier inversion" + tag, 0, tolerance}};
        Tracker complete{{"basis completeness" + tag, 0, tolerance}};

        for (std::size_t trial = 0; trial < signals; ++trial) {
            const auto x = random_signal(p, rng);
            const auto y = random_signal(p, rng);

            std::vector<Complex> lhs, rhs;
            auto flush = [&](Tracker& t) {
                t.record(relative_error(lhs, rhs));
                lhs.clear();
                rhs.clear();
            };

            for (std::int64_t a = 0; a < n_tau; ++a) {
                for (std::int64_t b = 0; b < n_nu; ++b) {
                    const double nu = static_cast<double>(b) * p.nu_step();
                    lhs.push_back(tfst::tfst_at(x, p, a + n_tau, b));
                    rhs.push_back(phase(nu * p.T / mu.value()) * tfst::tfst_at(x, p, a, b));
                }
            }
            flush(quasi);

            for (std::int64_t a = 0; a < n_tau; ++a) {
                for (std::int64_t b = 0; b < n_nu; ++b) {
                    lhs.push_back(tfst::tfst_at(x, p, a, b + n_nu));
                    rhs.push_back(tfst::tfst_at(x, p, a, b));
                }
            }
            flush(nuper);

            {
                const std::int64_t s = shift_dist(rng);
                const std::int64_t q = dopp_dist(rng);
                const double tau0 = static_cast<double>(s) * p.step();
                // lambda*mu*nu0 lands q steps along the Doppler grid.
                const double nu0 = static_cast<double>(q) * p.nu_step() / lm;
                const auto r = tfst::apply_dd_shift(x, tau0, nu0);
                for (std::int64_t a = 0; a < n_tau; ++a) {
                    for (std::int64_t b = 0; b < n_nu; ++b) {
                        const double tau = static_cast<double>(a) * p.step();
                        lhs.push_back(tfst::tfst_at(r, p, a, b));
                        rhs.push_back(tfst::tfst_at(x, p, a - s, b - q) * phase(nu0 * (tau - tau0)));
                    }
                }
                flush(shift);
            }

            {
                SampledSignal c{std::vector<Complex>(length), p.step(), 0.0};
                for (std::size_t i = 0; i < length; ++i) c.samples[i] = x.samples[i] * y.samples[i];
                std::vector<Complex> rhs_sym;
                for (std::int64_t a = 0; a < n_tau; ++a) {
                    for (std::int64_t b = 0; b < n_nu; ++b) {
                        Complex acc = 0.0, acc_sym = 0.0;
                        for (std::int64_t bp = 0; bp < n_nu; ++bp) {
                            acc += tfst::tfst_at(x, p, a, b - bp) * tfst::tfst_at(y, p, a, bp);
                            acc_sym += tfst::tfst_at(x, p, a, bp) * tfst::tfst_at(y, p, a, b - bp);
                        }
                        const double w = std::sqrt(lt) / lm * p.nu_step();
                        lhs.push_back(tfst::tfst_at(c, p, a, b));
                        rhs.push_back(w * acc);
                        rhs_sym.push_back(w * acc_sym);
                    }
                }
                mult_sym.record(relative_error(rhs_sym, rhs));
                flush(mult);
            }

            {
                SampledSignal c{std::vector<Complex>(length), p.step(), 0.0};
                const auto L = static_cast<std::int64_t>(length);
                for (std::int64_t i = 0; i < L; ++i) {
                    Complex acc = 0.0;
                    for (std::int64_t k = 0; k < L; ++k)
                        acc += x.samples[static_cast<std::size_t>(((i - k) % L + L) % L)] *
                               y.samples[static_cast<std::size_t>(k)];
                    c.samples[static_cast<std::size_t>(i)] = acc * p.step();
                }
                std::vector<Complex> rhs_sym;
                for (std::int64_t a = 0; a < n_tau; ++a) {
                    for (std::int64_t b = 0; b < n_nu; ++b) {
                        Complex acc = 0.0, acc_sym = 0.0;
                        for (std::int64_t ap = 0; ap < n_tau; ++ap) {
                            acc += tfst::tfst_at(x, p, a - ap, b) * tfst::tfst_at(y, p, ap, b);
                            acc_sym += tfst::tfst_at(x, p, ap, b) * tfst::tfst_at(y, p, a - ap, b);
                        }
                        const double w = p.step() / std::sqrt(lt);
                        lhs.push_back(tfst::tfst_at(c, p, a, b));
                        rhs.push_back(w * acc);
                        rhs_sym.push_back(w * acc_sym);
                    }
                }
                conv_sym.record(relative_error(rhs_sym, rhs));
                flush(conv);
            }

            const auto map = tfst::tfst_forward(x, p);
            time_inv.record(relative_error(tfst::tfst_invert_time(map, p).samples, x.samples));

            for (std::int64_t k = -1; k <= 1; ++k) {
                for (std::int64_t b = 0; b < n_nu; ++b) {
                    // lambda*mu*f = nu_b + k*mu*delta_f
                    const double f = (static_cast<double>(b) * p.nu_step() +
                                      static_cast<double>(k) * mu.value() * p.delta_f()) / lm;
                    lhs.push_back(tfst::tfst_to_fourier(map, p, f));
                    rhs.push_back(tfst::fourier_direct(x, f));
                }
            }
            flush(fourier);

            // Completeness is O(cells * frame) per signal; a few signals suffice.
            if (trial < 5) {
                ComplexMatrix coeffs(static_cast<std::size_t>(n_tau), static_cast<std::size_t>(n_nu));
                for (std::int64_t a = 0; a < n_tau; ++a)
                    for (std::int64_t b = 0; b < n_nu; ++b)
                        coeffs(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) =
                            tfst::project_coefficient(x, static_cast<double>(a) * p.step(),
                                                      static_cast<double>(b) * p.nu_step(), p);
                complete.record(relative_error(tfst::reconstruct_from_coefficients(coeffs, p).samples,
                                               x.samples));
            }
        }
        for (auto* t : {&quasi, &nuper, &shift, &mult, &mult_sym, &conv, &conv_sym, &time_inv,
                        &fourier, &complete}) {
            t->check.passed = t->check.cases > 0 && t->check.max_error <= t->check.tolerance;
            out.push_back(t->check);
        }
    }
    return out;
}

bool schedule_is_sound(std::size_t rows, std::size_t cols) {
    const auto order = detect::wavefront_schedule(rows, cols);
    if (order.size() != rows * cols) return false;
    std::vector<std::uint8_t> seen(rows * cols, 0);
    for (const auto& pos : order) {
        if (pos.row >= rows || pos.col >= cols || seen[pos.row * cols + pos.col]) return false;
        for (std::size_t a = pos.row; a < rows; ++a)
            for (std::size_t b = pos.col; b < cols; ++b)
                if ((a != pos.row || b != pos.col) && !seen[a * cols + b]) return false;
        seen[pos.row * cols + pos.col] = 1;
    }
    return true;
}

std::vector<PropertyCheck> detect_property_suite(std::size_t instances, std::uint64_t seed) {
    std::vector<PropertyCheck> out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> dim(1, 8);

    PropertyCheck decomposition{"objective decomposition sum J_mn = J", 0.0, 1e-10};
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t rows = dim(rng);
        const std::size_t cols = dim(rng);
        const auto model = detect::build_effective_model(
            random_matrix(rows, rows, rng), random_matrix(cols, cols, rng),
            random_matrix(rows, cols, rng));
        const auto s = random_matrix(rows, cols, rng);
        double sum = 0.0;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) sum += detect::partial_metric(model, s, i, j);
        const double total = detect::total_objective(model, s);
        decomposition.max_error = std::max(decomposition.max_error, std::abs(sum - total) / total);
        decomposition.cases += 1;
    }
    decomposition.passed = decomposition.max_error <= decomposition.tolerance;
    out.push_back(decomposition);

    PropertyCheck schedule{"wavefront schedule permutation and quadrant order (1..8)^2", 0.0, 0.0};
    for (std::size_t r = 1; r <= 8; ++r) {
        for (std::size_t c = 1; c <= 8; ++c) {
            schedule.cases += 1;
            if (!schedule_is_sound(r, c)) schedule.max_error = 1.0;
        }
    }
    schedule.passed = schedule.max_error == 0.0;
    out.push_back(schedule);

    PropertyCheck counters{"operation counts match the 2-D complexity formula", 0.0, 0.0};
    for (auto [M, N] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 2}, {4, 4}, {4, 8}, {8, 4}, {16, 16}}) {
        const auto model = detect::build_effective_model(
            random_matrix(N, N, rng), random_matrix(M, M, rng), random_matrix(N, M, rng));
        detect::OpCounter ops;
        (void)detect::sweep_partial_metrics(model, random_matrix(N, M, rng), ops);
        const auto predicted = detect::predicted_complexity(M, N);
        counters.cases += 1;
        if (ops.complex_mults != predicted.mults_2d || ops.complex_adds != predicted.adds_2d) {
            counters.max_error = 1.0;
        }
    }
    counters.passed = counters.max_error == 0.0;
    out.push_back(counters);
    return out;
}

}  // namespace notfs::verify
