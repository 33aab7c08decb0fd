#include "notfs/detect.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace notfs::detect {

namespace {

void require_shape(const ComplexMatrix& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + ", got " + std::to_string(m.rows()) +
                                    "x" + std::to_string(m.cols()));
    }
}

// Row form caches V = S L and reduces along rows; column form caches W = R S.
bool uses_row_form(const EffectiveModel& model) { return model.rows() <= model.cols(); }

// Half-product entry at (i, j) for a complete frame.
Complex cache_entry(const EffectiveModel& model, const ComplexMatrix& s, std::size_t i,
                    std::size_t j, OpCounter& counter) {
    Complex acc = 0.0;
    std::size_t terms = 0;
    if (uses_row_form(model)) {
        for (std::size_t b = j; b < model.cols(); ++b, ++terms) acc += s(i, b) * model.l(b, j);
    } else {
        for (std::size_t a = i; a < model.rows(); ++a, ++terms) acc += model.r(i, a) * s(a, j);
    }
    counter.cache_mults += terms;
    counter.cache_adds += terms - 1;
    return acc;
}

// U_ij minus the contributions reachable through cached entries other than (i, j).
Complex residual_base(const EffectiveModel& model, const ComplexMatrix& cache, std::size_t i,
                      std::size_t j, OpCounter& counter) {
    Complex z = model.u(i, j);
    std::size_t terms = 0;
    if (uses_row_form(model)) {
        for (std::size_t a = i + 1; a < model.rows(); ++a, ++terms) z -= model.r(i, a) * cache(a, j);
    } else {
        for (std::size_t b = j + 1; b < model.cols(); ++b, ++terms) z -= cache(i, b) * model.l(b, j);
    }
    counter.complex_mults += terms;
    counter.complex_adds += terms;
    return z;
}

// Finishes the kernel for a trial cache value at (i, j).
double finish_metric(const EffectiveModel& model, Complex base, Complex cache_ij, std::size_t i,
                     std::size_t j, OpCounter& counter) {
    const Complex coeff = uses_row_form(model) ? model.r(i, i) : model.l(j, j);
    const Complex z = base - coeff * cache_ij;
    counter.complex_mults += 2;  // coefficient product and |z|^2
    counter.complex_adds += 1;
    return std::norm(z);
}

}  // namespace

EffectiveModel build_effective_model(const ComplexMatrix& doppler, const ComplexMatrix& delay,
                                     const ComplexMatrix& y_tf,
                                     const std::optional<ComplexMatrix>& h1,
                                     const std::optional<ComplexMatrix>& h2) {
    if (!doppler.is_square() || !delay.is_square()) {
        throw std::invalid_argument("build_effective_model: transform matrices must be square");
    }
    require_shape(y_tf, doppler.rows(), delay.rows(), "build_effective_model observation");
    EffectiveModel model;
    if (h1) {
        require_shape(*h1, doppler.rows(), doppler.rows(), "build_effective_model H1");
        model.G = matmul(*h1, doppler);
    } else {
        model.G = doppler;
    }
    if (h2) {
        require_shape(*h2, delay.rows(), delay.rows(), "build_effective_model H2");
        model.H = matmul(*h2, delay);
    } else {
        model.H = delay;
    }
    auto qr_g = qr_decompose(model.G);
    auto qr_h = qr_decompose(model.H);
    if (qr_g.rank_deficient || qr_h.rank_deficient) {
        throw SingularModelError("effective model is rank deficient (min |R_ii| = " +
                                 std::to_string(std::min(qr_g.min_abs_diagonal,
                                                         qr_h.min_abs_diagonal)) +
                                 ")");
    }
    model.q_g = std::move(qr_g.q);
    model.r = std::move(qr_g.r);
    model.q_h = std::move(qr_h.q);
    model.l = adjoint(qr_h.r);
    model.gram_g = matmul(adjoint(model.G), model.G);
    model.gram_h = matmul(adjoint(model.H), model.H);
    update_observation(model, y_tf);
    return model;
}

void update_observation(EffectiveModel& model, const ComplexMatrix& y_t) {
    require_shape(y_t, model.rows(), model.cols(), "update_observation");
    model.y_t = y_t;
    model.u = matmul(matmul(adjoint(model.q_g), y_t), model.q_h);
}

double total_objective(const EffectiveModel& model, const ComplexMatrix& s) {
    require_shape(s, model.rows(), model.cols(), "total_objective");
    return frobenius_sq(model.y_t - matmul(matmul(model.G, s), adjoint(model.H)));
}

PartialFrame PartialFrame::empty(std::size_t rows, std::size_t cols) {
    return {ComplexMatrix(rows, cols), std::vector<std::uint8_t>(rows * cols, 0)};
}

PartialFrame PartialFrame::complete(const ComplexMatrix& s) {
    return {s, std::vector<std::uint8_t>(s.size(), 1)};
}

void PartialFrame::set(std::size_t row, std::size_t col, Complex value) {
    values(row, col) = value;
    decided[row * values.cols() + col] = 1;
}

double partial_metric(const EffectiveModel& model, const PartialFrame& s, std::size_t row,
                      std::size_t col) {
    require_shape(s.values, model.rows(), model.cols(), "partial_metric");
    if (row >= model.rows() || col >= model.cols()) {
        throw std::out_of_range("partial_metric: position outside the frame");
    }
    Complex z = model.u(row, col);
    for (std::size_t a = row; a < model.rows(); ++a) {
        for (std::size_t b = col; b < model.cols(); ++b) {
            if (!s.is_decided(a, b)) {
                throw std::invalid_argument("partial_metric: undecided entry (" + std::to_string(a) +
                                            ", " + std::to_string(b) + ") inside the quadrant");
            }
            z -= model.r(row, a) * s.values(a, b) * model.l(b, col);
        }
    }
    return std::norm(z);
}

double partial_metric(const EffectiveModel& model, const ComplexMatrix& s, std::size_t row,
                      std::size_t col) {
    return partial_metric(model, PartialFrame::complete(s), row, col);
}

std::vector<Position> wavefront_schedule(std::size_t rows, std::size_t cols) {
    std::vector<Position> order;
    if (rows == 0 || cols == 0) return order;
    order.reserve(rows * cols);
    const std::size_t last_r = rows - 1;
    const std::size_t last_c = cols - 1;
    const std::size_t shells = std::min(rows, cols);
    order.push_back({last_r, last_c});
    for (std::size_t i = 1; i < shells; ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            order.push_back({last_r - k, last_c - i});
            order.push_back({last_r - i, last_c - k});
        }
        order.push_back({last_r - i, last_c - i});
    }
    if (rows > cols) {
        for (std::size_t i = cols; i < rows; ++i)
            for (std::size_t k = 0; k < cols; ++k) order.push_back({last_r - i, last_c - k});
    } else if (rows < cols) {
        for (std::size_t i = rows; i < cols; ++i)
            for (std::size_t k = 0; k < rows; ++k) order.push_back({last_r - k, last_c - i});
    }
    return order;
}

OpCounter& OpCounter::operator+=(const OpCounter& other) {
    complex_mults += other.complex_mults;
    complex_adds += other.complex_adds;
    cache_mults += other.cache_mults;
    cache_adds += other.cache_adds;
    return *this;
}

double sweep_partial_metrics(const EffectiveModel& model, const ComplexMatrix& s,
                             OpCounter& counter) {
    require_shape(s, model.rows(), model.cols(), "sweep_partial_metrics");
    ComplexMatrix cache(model.rows(), model.cols());
    double total = 0.0;
    for (const auto& pos : wavefront_schedule(model.rows(), model.cols())) {
        cache(pos.row, pos.col) = cache_entry(model, s, pos.row, pos.col, counter);
        const Complex base = residual_base(model, cache, pos.row, pos.col, counter);
        total += finish_metric(model, base, cache(pos.row, pos.col), pos.row, pos.col, counter);
    }
    return total;
}

CandidateList CandidateList::seed(const EffectiveModel& model, std::size_t k_list,
                                  double radius_sq) {
    if (k_list == 0) throw std::invalid_argument("CandidateList: k_list must be positive");
    if (!(radius_sq >= 0.0)) throw std::invalid_argument("CandidateList: negative radius");
    CandidateList list{k_list, radius_sq, {}};
    list.entries.push_back(
        {std::vector<int>(model.rows() * model.cols(), -1), ComplexMatrix(model.rows(), model.cols()), 0.0});
    return list;
}

std::vector<double> CandidateList::losses() const {
    std::vector<double> out(k_list, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < entries.size() && i < k_list; ++i) out[i] = entries[i].loss;
    return out;
}

CandidateList sd2d_update(const CandidateList& candidates, const EffectiveModel& model,
                          const modem::Constellation& constellation, std::size_t row,
                          std::size_t col, OpCounter& counter, bool progress_guarantee) {
    if (constellation.points.empty()) throw std::invalid_argument("sd2d_update: empty constellation");
    if (candidates.entries.empty()) throw std::invalid_argument("sd2d_update: no active candidates");
    if (row >= model.rows() || col >= model.cols()) {
        throw std::out_of_range("sd2d_update: position outside the frame");
    }
    const std::size_t cols = model.cols();
    const bool row_form = uses_row_form(model);

    struct Child {
        std::size_t parent;
        std::size_t label;
        double loss;
        Complex cache_value;
    };
    std::vector<Child> children;
    children.reserve(candidates.entries.size() * constellation.points.size());

    // After a fallback step every survivor may lie outside the radius; expand them all then.
    const bool any_inside =
        std::any_of(candidates.entries.begin(), candidates.entries.end(),
                    [&](const Candidate& c) { return c.loss <= candidates.radius_sq; });
    for (std::size_t p = 0; p < candidates.entries.size(); ++p) {
        const Candidate& cand = candidates.entries[p];
        if (any_inside && !(cand.loss <= candidates.radius_sq)) continue;
        if (cand.labels[row * cols + col] >= 0) {
            throw std::invalid_argument("sd2d_update: position already decided");
        }
        const Complex base = residual_base(model, cand.cache, row, col, counter);

        // Part of the cache entry that does not involve the trial symbol.
        Complex partial = 0.0;
        std::size_t terms = 0;
        if (row_form) {
            for (std::size_t b = col + 1; b < cols; ++b, ++terms) {
                const int lbl = cand.labels[row * cols + b];
                if (lbl < 0) throw std::invalid_argument("sd2d_update: quadrant not decided");
                partial += constellation.points[static_cast<std::size_t>(lbl)] * model.l(b, col);
            }
        } else {
            for (std::size_t a = row + 1; a < model.rows(); ++a, ++terms) {
                const int lbl = cand.labels[a * cols + col];
                if (lbl < 0) throw std::invalid_argument("sd2d_update: quadrant not decided");
                partial += model.r(row, a) * constellation.points[static_cast<std::size_t>(lbl)];
            }
        }
        if (terms > 0) {
            counter.cache_mults += terms;
            counter.cache_adds += terms - 1;
        }
        const Complex own = row_form ? model.l(col, col) : model.r(row, row);
        for (std::size_t s = 0; s < constellation.points.size(); ++s) {
            const Complex value = constellation.points[s] * own + partial;
            counter.cache_mults += 1;
            if (terms > 0) counter.cache_adds += 1;
            const double metric = finish_metric(model, base, value, row, col, counter);
            children.push_back({p, s, cand.loss + metric, value});
        }
    }
    std::stable_sort(children.begin(), children.end(),
                     [](const Child& a, const Child& b) { return a.loss < b.loss; });

    CandidateList next{candidates.k_list, candidates.radius_sq, {}};
    auto take = [&](const Child& c) {
        Candidate child = candidates.entries[c.parent];
        child.labels[row * cols + col] = static_cast<int>(c.label);
        child.cache(row, col) = c.cache_value;
        child.loss = c.loss;
        next.entries.push_back(std::move(child));
    };
    for (const auto& c : children) {
        if (next.entries.size() >= next.k_list) break;
        if (!(c.loss <= next.radius_sq)) break;
        take(c);
    }
    if (next.entries.empty()) {
        if (!progress_guarantee) {
            throw RadiusExhaustedError("sd2d_update: every child exceeds the search radius");
        }
        take(children.front());
    }
    return next;
}

Sd2dResult sd2d_decode(const EffectiveModel& model, const modem::Constellation& constellation,
                       const Sd2dOptions& options) {
    double initial_loss = std::numeric_limits<double>::infinity();
    if (options.initial) {
        initial_loss = total_objective(model, *options.initial);
    }
    double radius_sq = std::numeric_limits<double>::infinity();
    if (options.radius_sq) {
        radius_sq = *options.radius_sq;
    } else if (options.initial) {
        radius_sq = (1.0 + 1e-6) * initial_loss;
    }
    if (!(radius_sq > 0.0)) {
        // A zero-loss initial frame is already optimal.
        if (options.initial && initial_loss == 0.0) {
            return {*options.initial, 0.0, {}, true};
        }
        throw std::invalid_argument("sd2d_decode: radius must be positive");
    }

    Sd2dResult result;
    CandidateList list = CandidateList::seed(model, options.k_list, radius_sq);
    for (const auto& pos : wavefront_schedule(model.rows(), model.cols())) {
        list = sd2d_update(list, model, constellation, pos.row, pos.col, result.ops,
                           options.progress_guarantee);
    }
    const Candidate& best = list.entries.front();
    result.s_hat = ComplexMatrix(model.rows(), model.cols());
    auto out = result.s_hat.data();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = constellation.points[static_cast<std::size_t>(best.labels[i])];
    result.final_loss = best.loss;
    if (options.initial && initial_loss < result.final_loss) {
        result.s_hat = *options.initial;
        result.final_loss = initial_loss;
        result.returned_initial = true;
    }
    return result;
}

ComplexityEstimate predicted_complexity(std::size_t M, std::size_t N) {
    const std::uint64_t mn = static_cast<std::uint64_t>(M) * N;
    const std::uint64_t shorter = std::min(M, N);
    ComplexityEstimate e;
    e.mults_2d = mn * (shorter + 3) / 2;
    e.adds_2d = mn * (shorter + 1) / 2;
    e.qr_rows_dim = M;
    e.qr_cols_dim = N;
    e.mults_1d = mn * (1 + mn) / 2;
    e.adds_1d = e.mults_1d;
    e.qr_1d_dim = static_cast<std::size_t>(mn);
    return e;
}

ComplexMatrix matched_filter_estimate(const EffectiveModel& model) {
    return matmul(matmul(adjoint(model.G), model.y_t), model.H);
}

ComplexMatrix apply_distortion(const EffectiveModel& model, const ComplexMatrix& s) {
    return matmul(matmul(model.gram_g, s), adjoint(model.gram_h));
}

double im_residual(const EffectiveModel& model, const ComplexMatrix& x0, const ComplexMatrix& x) {
    return frobenius_distance(x0, apply_distortion(model, x));
}

ComplexMatrix im_decode(const EffectiveModel& model, double omega, std::size_t iterations) {
    const ComplexMatrix x0 = matched_filter_estimate(model);
    ComplexMatrix x = x0;
    for (std::size_t k = 0; k < iterations; ++k) {
        ComplexMatrix step = x0 - apply_distortion(model, x);
        step *= omega;
        x += step;
    }
    return x;
}

ComplexMatrix soft_clip(const ComplexMatrix& w, double d) {
    auto clip = [d](double v) { return std::abs(v) < d ? v : (v >= 0.0 ? 1.0 : -1.0); };
    ComplexMatrix out = w;
    for (auto& z : out.data()) z = Complex(clip(z.real()), clip(z.imag()));
    return out;
}

double soft_threshold(std::size_t r, std::size_t iterations, const SoftDecodeOptions& options) {
    const double scale = options.schedule == ThresholdSchedule::IterationCount
                             ? static_cast<double>(iterations)
                             : options.overloading;
    if (!(scale > 0.0)) return 0.0;
    return std::max(0.0, 1.0 - static_cast<double>(r) / scale);
}

ComplexMatrix im_soft_decode(const EffectiveModel& model, double omega, std::size_t iterations,
                             const SoftDecodeOptions& options) {
    if (iterations == 0) throw std::invalid_argument("im_soft_decode: need at least one iteration");
    if (!(options.axis_amplitude > 0.0)) {
        throw std::invalid_argument("im_soft_decode: axis amplitude must be positive");
    }
    // Iterate in units where the constellation sits at +-1 per axis.
    ComplexMatrix w0 = matched_filter_estimate(model);
    w0 *= 1.0 / options.axis_amplitude;
    ComplexMatrix w = w0;
    for (std::size_t r = 1; r <= iterations; ++r) {
        const ComplexMatrix c = soft_clip(w, soft_threshold(r, iterations, options));
        ComplexMatrix step = w0 - apply_distortion(model, c);
        step *= omega;
        if (options.update == SoftStateUpdate::Clipped) w = c;
        w += step;
    }
    w *= options.axis_amplitude;
    return w;
}

modem::DDFrame hard_demap(const ComplexMatrix& w, const modem::Constellation& constellation) {
    modem::DDFrame out{ComplexMatrix(w.rows(), w.cols())};
    auto dst = out.symbols.data();
    auto src = w.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = constellation.points[constellation.nearest(src[i])];
    return out;
}

}  // namespace notfs::detect
