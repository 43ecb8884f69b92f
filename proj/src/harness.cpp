#include "efla/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "efla/kernels.hpp"

namespace efla {

std::string scheme_name(KeyScheme s) {
    switch (s) {
        case KeyScheme::Orthonormal: return "orthonormal";
        case KeyScheme::GaussianNormalized: return "gaussian-normalized";
        case KeyScheme::GaussianRaw: return "gaussian-raw";
    }
    return "unknown";
}

KeyScheme parse_scheme(std::string_view text) {
    if (text == "orthonormal") return KeyScheme::Orthonormal;
    if (text == "gaussian-normalized") return KeyScheme::GaussianNormalized;
    if (text == "gaussian-raw") return KeyScheme::GaussianRaw;
    throw std::invalid_argument("parse_scheme: unknown key scheme '" + std::string(text) + "'");
}

PerturbationSpec PerturbationSpec::dropout(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("dropout: p must be in [0,1]");
    PerturbationSpec s;
    s.kind = Kind::Dropout;
    s.param = p;
    return s;
}

PerturbationSpec PerturbationSpec::scale(double factor, bool scale_values) {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw std::invalid_argument("scale: factor must be finite and > 0");
    PerturbationSpec s;
    s.kind = Kind::Scale;
    s.param = factor;
    s.scale_values = scale_values;
    return s;
}

PerturbationSpec PerturbationSpec::gaussian(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("gaussian: sigma must be finite and >= 0");
    PerturbationSpec s;
    s.kind = Kind::Gaussian;
    s.param = sigma;
    return s;
}

std::string PerturbationSpec::name() const {
    switch (kind) {
        case Kind::None: return "none";
        case Kind::Dropout: return "dropout";
        case Kind::Scale: return "scale";
        case Kind::Gaussian: return "gaussian";
    }
    return "unknown";
}

namespace {

void fill_gaussian(SplitMix64& rng, std::span<double> row) {
    for (double& x : row) x = rng.next_gaussian();
}

// Modified Gram-Schmidt with a re-draw on (vanishingly unlikely)
// degenerate draws; two projection passes keep the residual
// orthogonality at the eps level the recall checks rely on.
void fill_orthonormal(SplitMix64& rng, Mat& keys) {
    const Kernels& kn = active();
    for (std::size_t i = 0; i < keys.rows(); ++i) {
        auto row = keys.row(i);
        double norm = 0.0;
        do {
            fill_gaussian(rng, row);
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t j = 0; j < i; ++j) {
                    const double proj = kn.dot(row.size(), row.data(), keys.row(j).data());
                    kn.axpy(row.size(), -proj, keys.row(j).data(), row.data());
                }
            }
            norm = std::sqrt(kn.sumsq(row.size(), row.data()));
        } while (norm < 1e-6);
        kn.scal(row.size(), 1.0 / norm, row.data());
    }
}

RecallTask assemble_task(const Mat& keys, const Mat& vals, std::size_t n_queries) {
    const std::size_t n = keys.rows();
    const std::size_t dk = keys.cols();
    const std::size_t dv = vals.cols();
    const std::size_t nq = n_queries;
    RecallTask task;
    task.n_pairs = n;
    task.store_len = n;
    const std::size_t l = n + nq;
    task.batch.q = Mat(l, dk);
    task.batch.k = Mat(l, dk);
    task.batch.v = Mat(l, dv);
    task.batch.beta.assign(l, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(keys.row(i).data(), dk, task.batch.k.row(i).data());
        std::copy_n(vals.row(i).data(), dv, task.batch.v.row(i).data());
    }
    task.targets = Mat(nq, dv);
    for (std::size_t i = 0; i < nq; ++i) {
        const std::size_t pair = i % n;
        std::copy_n(keys.row(pair).data(), dk, task.batch.q.row(n + i).data());
        std::copy_n(vals.row(pair).data(), dv, task.targets.row(i).data());
    }
    return task;
}

}  // namespace

RecallTask gen_recall(std::uint64_t seed, std::size_t n_pairs, std::size_t d_k, std::size_t d_v,
                      KeyScheme scheme) {
    if (n_pairs < 1) throw std::invalid_argument("gen_recall: n_pairs must be >= 1");
    if (scheme == KeyScheme::Orthonormal && n_pairs > d_k)
        throw std::invalid_argument("gen_recall: orthonormal scheme requires n_pairs <= d_k");
    SplitMix64 rng = derive_stream(seed, 1);
    const Kernels& kn = active();
    Mat keys(n_pairs, d_k);
    switch (scheme) {
        case KeyScheme::Orthonormal:
            fill_orthonormal(rng, keys);
            break;
        case KeyScheme::GaussianNormalized:
            for (std::size_t i = 0; i < n_pairs; ++i) {
                auto row = keys.row(i);
                double norm = 0.0;
                do {
                    fill_gaussian(rng, row);
                    norm = std::sqrt(kn.sumsq(row.size(), row.data()));
                } while (norm == 0.0);
                kn.scal(row.size(), 1.0 / norm, row.data());
            }
            break;
        case KeyScheme::GaussianRaw:
            for (std::size_t i = 0; i < n_pairs; ++i) fill_gaussian(rng, keys.row(i));
            break;
    }
    Mat vals(n_pairs, d_v);
    for (std::size_t i = 0; i < n_pairs; ++i) fill_gaussian(rng, vals.row(i));
    RecallTask task = assemble_task(keys, vals, n_pairs);
    task.scheme = scheme;
    task.scheme_label = scheme_name(scheme);
    return task;
}

RecallTask gen_repeated_recall(std::uint64_t seed, std::size_t n_repeats, std::size_t d_k,
                               std::size_t d_v) {
    if (n_repeats < 1) throw std::invalid_argument("gen_repeated_recall: n_repeats must be >= 1");
    SplitMix64 rng = derive_stream(seed, 1);
    const Kernels& kn = active();
    Vec key(d_k);
    double norm = 0.0;
    do {
        fill_gaussian(rng, key.span());
        norm = std::sqrt(kn.sumsq(d_k, key.data()));
    } while (norm == 0.0);
    kn.scal(d_k, 1.0 / norm, key.data());
    Vec val(d_v);
    fill_gaussian(rng, val.span());

    RecallTask task;
    task.n_pairs = 1;
    task.store_len = n_repeats;
    task.scheme = KeyScheme::GaussianNormalized;
    task.scheme_label = "repeated";
    const std::size_t l = n_repeats + 1;
    task.batch.q = Mat(l, d_k);
    task.batch.k = Mat(l, d_k);
    task.batch.v = Mat(l, d_v);
    task.batch.beta.assign(l, 1.0);
    for (std::size_t t = 0; t < n_repeats; ++t) {
        std::copy_n(key.data(), d_k, task.batch.k.row(t).data());
        std::copy_n(val.data(), d_v, task.batch.v.row(t).data());
    }
    std::copy_n(key.data(), d_k, task.batch.q.row(n_repeats).data());
    task.targets = Mat(1, d_v);
    std::copy_n(val.data(), d_v, task.targets.row(0).data());
    return task;
}

SequenceBatch perturb(const SequenceBatch& batch, const PerturbationSpec& p, std::uint64_t seed,
                      std::size_t store_len) {
    batch.validate();
    if (store_len > batch.length()) throw std::invalid_argument("perturb: store_len exceeds batch length");
    SequenceBatch out = batch;
    if (p.kind == PerturbationSpec::Kind::None) return out;
    const Kernels& kn = active();
    SplitMix64 rng = derive_stream(seed, 2);
    switch (p.kind) {
        case PerturbationSpec::Kind::Dropout: {
            if (!(p.param >= 0.0 && p.param <= 1.0))
                throw std::invalid_argument("perturb: dropout p must be in [0,1]");
            for (std::size_t t = 0; t < store_len; ++t) {
                if (rng.next_double() < p.param) {
                    std::fill_n(out.k.row(t).data(), out.k.cols(), 0.0);
                    std::fill_n(out.v.row(t).data(), out.v.cols(), 0.0);
                }
            }
            break;
        }
        case PerturbationSpec::Kind::Scale: {
            if (!(p.param > 0.0) || !std::isfinite(p.param))
                throw std::invalid_argument("perturb: scale factor must be finite and > 0");
            for (std::size_t t = 0; t < out.length(); ++t) {
                kn.scal(out.k.cols(), p.param, out.k.row(t).data());
                if (p.scale_values) kn.scal(out.v.cols(), p.param, out.v.row(t).data());
            }
            break;
        }
        case PerturbationSpec::Kind::Gaussian: {
            if (!(p.param >= 0.0) || !std::isfinite(p.param))
                throw std::invalid_argument("perturb: sigma must be finite and >= 0");
            if (p.param == 0.0) break;
            for (std::size_t t = 0; t < store_len; ++t) {
                for (double& x : out.k.row(t)) x += p.param * rng.next_gaussian();
                for (double& x : out.v.row(t)) x += p.param * rng.next_gaussian();
            }
            break;
        }
        case PerturbationSpec::Kind::None:
            break;
    }
    return out;
}

TrialReport eval_recall(const Method& method, const RecallTask& task, const PerturbationSpec& p,
                        std::uint64_t seed) {
    const SequenceBatch perturbed = perturb(task.batch, p, seed, task.store_len);
    const ScanResult res = recurrent_forward(method, perturbed);
    const Kernels& kn = active();
    const std::size_t nq = task.targets.rows();
    const std::size_t dv = task.targets.cols();

    double se = 0.0;
    double cos_sum = 0.0;
    for (std::size_t i = 0; i < nq; ++i) {
        auto out = res.outputs.row(task.store_len + i);
        auto tgt = task.targets.row(i);
        for (std::size_t j = 0; j < dv; ++j) {
            const double d = out[j] - tgt[j];
            se += d * d;
        }
        const double no = std::sqrt(kn.sumsq(dv, out.data()));
        const double nt = std::sqrt(kn.sumsq(dv, tgt.data()));
        if (no == 0.0 && nt == 0.0)
            cos_sum += 1.0;
        else if (no == 0.0 || nt == 0.0)
            cos_sum += 0.0;
        else
            cos_sum += kn.dot(dv, out.data(), tgt.data()) / (no * nt);
    }

    TrialReport rep;
    rep.seed = seed;
    rep.method = method.name();
    rep.scheme = task.scheme_label.empty() ? scheme_name(task.scheme) : task.scheme_label;
    rep.perturbation = p.name();
    rep.param = p.param;
    rep.mse = se / static_cast<double>(nq * dv);
    rep.cosine = cos_sum / static_cast<double>(nq);
    rep.divergence_index = res.divergence_index;
    double m = 0.0;
    for (double x : res.state_norm_trace) {
        if (!std::isfinite(x)) {
            m = std::numeric_limits<double>::infinity();
            break;
        }
        m = std::max(m, x);
    }
    rep.max_state_norm = m;
    return rep;
}

std::vector<StabilityRow> stability_sweep(const std::vector<double>& x_values, unsigned steps,
                                          const std::vector<Method>& methods) {
    if (steps < 1) throw std::invalid_argument("stability_sweep: steps must be >= 1");
    const std::size_t d = 8;
    const Kernels& kn = active();
    std::vector<StabilityRow> rows;
    rows.reserve(x_values.size() * methods.size());
    for (double x : x_values) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument("stability_sweep: x values must be finite and >= 0");
        for (const Method& m : methods) {
            // Unit key along e1 makes beta*lambda = x with lambda = 1.
            Vec k(d);
            k[0] = 1.0;
            Vec v(d);  // zero: pure transition
            Mat s(d, d);
            for (std::size_t j = 0; j < d; ++j) s.at(0, j) = 1.0;
            Vec scratch(d);
            Vec t(d);
            kn.mat_tvec(d, d, s.data(), k.data(), t.data());
            double prev = std::sqrt(kn.sumsq(d, t.data()));
            double sum_log = 0.0;
            unsigned done = 0;
            bool hit_zero = false;
            for (unsigned i = 0; i < steps; ++i) {
                step_core(m, s, k.span(), v.span(), x, scratch);
                kn.mat_tvec(d, d, s.data(), k.data(), t.data());
                const double cur = std::sqrt(kn.sumsq(d, t.data()));
                ++done;
                if (cur == 0.0) {
                    hit_zero = true;
                    break;
                }
                sum_log += std::log(cur / prev);
                prev = cur;
            }
            StabilityRow row;
            row.x = x;
            row.method = m.name();
            row.measured_factor = hit_zero ? 0.0 : std::exp(sum_log / done);
            switch (m.kind) {
                case MethodKind::VanillaLinear:
                    row.predicted_factor = 1.0;
                    break;
                case MethodKind::DeltaEuler:
                    row.predicted_factor = std::abs(1.0 - x);
                    break;
                case MethodKind::RK2:
                case MethodKind::RK4:
                case MethodKind::RKN:
                    row.predicted_factor = std::abs(series_phi(m.order, x).first);
                    break;
                case MethodKind::ExactEFLA:
                case MethodKind::Reference:
                    row.predicted_factor = std::exp(-x);
                    break;
            }
            row.abs_error = std::abs(row.measured_factor - row.predicted_factor);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<ConvergenceRow> rk_convergence(unsigned max_order, double beta, double lambda) {
    if (max_order < 1) throw std::invalid_argument("rk_convergence: max_order must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("rk_convergence: lambda must be > 0");
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("rk_convergence: beta must be finite and >= 0");
    const double x = beta * lambda;
    const double alpha = decay_gate(beta, lambda).alpha;
    const double ex = std::exp(x);
    std::vector<ConvergenceRow> rows;
    rows.reserve(max_order);
    double tail = x / 2.0;  // x^N / (N+1)! for N = 1
    for (unsigned n = 1; n <= max_order; ++n) {
        ConvergenceRow row;
        row.order = n;
        row.x = x;
        row.error = std::abs(beta * series_phi(n, x).second - alpha);
        row.bound = ex * tail * beta;
        row.ratio = row.bound > 0.0 ? row.error / row.bound : 0.0;
        rows.push_back(row);
        tail *= x / (n + 2);
    }
    return rows;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const std::vector<TrialReport>& rows) {
    std::string s = "seed,method,scheme,perturbation,param,mse,cosine,max_state_norm,divergence_index\n";
    for (const TrialReport& r : rows) {
        s += std::to_string(r.seed);
        s += ',';
        s += r.method;
        s += ',';
        s += r.scheme;
        s += ',';
        s += r.perturbation;
        s += ',';
        s += format_double(r.param);
        s += ',';
        s += format_double(r.mse);
        s += ',';
        s += format_double(r.cosine);
        s += ',';
        s += format_double(r.max_state_norm);
        s += ',';
        s += std::to_string(r.divergence_index);
        s += '\n';
    }
    return s;
}

std::string to_csv(const std::vector<StabilityRow>& rows) {
    std::string s = "x,method,measured_factor,predicted_factor,abs_error\n";
    for (const StabilityRow& r : rows) {
        s += format_double(r.x);
        s += ',';
        s += r.method;
        s += ',';
        s += format_double(r.measured_factor);
        s += ',';
        s += format_double(r.predicted_factor);
        s += ',';
        s += format_double(r.abs_error);
        s += '\n';
    }
    return s;
}

std::string to_csv(const std::vector<ConvergenceRow>& rows) {
    std::string s = "order,x,error,bound,ratio\n";
    for (const ConvergenceRow& r : rows) {
        s += std::to_string(r.order);
        s += ',';
        s += format_double(r.x);
        s += ',';
        s += format_double(r.error);
        s += ',';
        s += format_double(r.bound);
        s += ',';
        s += format_double(r.ratio);
        s += '\n';
    }
    return s;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_file: cannot open '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write_file: write failed for '" + path + "'");
}

}  // namespace efla
