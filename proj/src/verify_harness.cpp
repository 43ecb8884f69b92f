#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "efla/harness.hpp"
#include "verify_internal.hpp"

namespace efla::verify {

namespace {

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> lines;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

void suite_recall(Ctx& ctx) {
    const std::uint64_t seed = ctx.opt.seed;

    {
        RecallTask task = gen_recall(seed, 1, 4, 3, KeyScheme::Orthonormal);
        ScanResult r = recurrent_forward(Method::efla(), task.batch);
        const double gain = 1.0 - std::exp(-1.0);  // alpha at beta = lambda = 1
        double worst = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
            worst = std::max(worst,
                             std::abs(r.outputs.at(task.store_len, j) - gain * task.targets.at(0, j)));
        ctx.check_le(worst, ctx.tol(1e-12), "single pair reads back (1 - e^{-1}) v");
        TrialReport rep = eval_recall(Method::efla(), task, PerturbationSpec::none(), seed);
        ctx.check_true(rep.cosine >= 1.0 - ctx.tol(1e-12), "single-pair cosine is 1");
    }

    {
        RecallTask task = gen_recall(seed + 1, 8, 8, 6, KeyScheme::Orthonormal);
        TrialReport rep = eval_recall(Method::euler(), task, PerturbationSpec::none(), seed + 1);
        ctx.check_le(rep.mse, ctx.tol(1e-20), "orthonormal delta-rule recall is exact");
        for (const Method& m : {Method::euler(), Method::rk2(), Method::rk4(), Method::rkn(6),
                                Method::efla()}) {
            TrialReport r = eval_recall(m, task, PerturbationSpec::none(), seed + 1);
            ctx.check_true(r.cosine >= 1.0 - ctx.tol(1e-12),
                           "orthonormal direction preserved under " + m.name());
        }
    }

    // against a fresh explicit-operator replay, including the metric
    {
        RecallTask task = gen_recall(seed + 2, 8, 8, 5, KeyScheme::GaussianNormalized);
        ScanResult fast = recurrent_forward(Method::efla(), task.batch);
        Mat s(8, 5);
        Mat outputs(task.batch.length(), 5);
        for (std::size_t t = 0; t < task.batch.length(); ++t) {
            Vec k(std::vector<double>(task.batch.k.row(t).begin(), task.batch.k.row(t).end()));
            Vec v(std::vector<double>(task.batch.v.row(t).begin(), task.batch.v.row(t).end()));
            ExplicitOperators ops = explicit_operators(Method::efla(), {k, v, task.batch.beta[t]});
            s = add(matmul(ops.transition, s), ops.input_term);
            Vec o(5);
            matvec_transposed(s, task.batch.q.row(t), o.span());
            std::copy_n(o.data(), 5, outputs.row(t).data());
        }
        ctx.check_le(max_abs_diff(outputs, fast.outputs), ctx.tol(1e-12),
                     "gaussian-normalized recall vs replay oracle");
        double se = 0.0;
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 5; ++j) {
                const double d = outputs.at(task.store_len + i, j) - task.targets.at(i, j);
                se += d * d;
            }
        TrialReport rep = eval_recall(Method::efla(), task, PerturbationSpec::none(), seed + 2);
        ctx.check_le(std::abs(rep.mse - se / 40.0), ctx.tol(1e-12), "MSE matches replay arithmetic");
    }

    // determinism of the full pipeline
    {
        RecallTask a = gen_recall(seed + 3, 6, 8, 4, KeyScheme::GaussianRaw);
        RecallTask b = gen_recall(seed + 3, 6, 8, 4, KeyScheme::GaussianRaw);
        ctx.check_true(a.batch.k == b.batch.k && a.batch.v == b.batch.v && a.targets == b.targets,
                       "task generation is seed-deterministic");
        PerturbationSpec g = PerturbationSpec::gaussian(0.25);
        TrialReport r1 = eval_recall(Method::efla(), a, g, seed + 3);
        TrialReport r2 = eval_recall(Method::efla(), b, g, seed + 3);
        ctx.check_true(r1.mse == r2.mse && r1.cosine == r2.cosine &&
                           r1.max_state_norm == r2.max_state_norm &&
                           r1.divergence_index == r2.divergence_index,
                       "trial reports are bitwise reproducible");
    }

    // perturbation mechanics
    {
        RecallTask task = gen_recall(seed + 4, 5, 8, 4, KeyScheme::GaussianRaw);
        SequenceBatch same = perturb(task.batch, PerturbationSpec::dropout(0.0), seed, task.store_len);
        ctx.check_true(same.k == task.batch.k && same.v == task.batch.v, "dropout(0) is identity");
        SequenceBatch same2 = perturb(task.batch, PerturbationSpec::gaussian(0.0), seed, task.store_len);
        ctx.check_true(same2.k == task.batch.k && same2.v == task.batch.v, "gaussian(0) is identity");

        SequenceBatch gone = perturb(task.batch, PerturbationSpec::dropout(1.0), seed, task.store_len);
        bool zeroed = true;
        for (std::size_t t = 0; t < task.store_len; ++t)
            if (norm2(gone.k.row(t)) != 0.0 || norm2(gone.v.row(t)) != 0.0) zeroed = false;
        ctx.check_true(zeroed, "dropout(1) clears every store token");
        bool query_rows_intact = true;
        for (std::size_t t = task.store_len; t < task.batch.length(); ++t)
            if (!(std::equal(gone.q.row(t).begin(), gone.q.row(t).end(), task.batch.q.row(t).begin())))
                query_rows_intact = false;
        ctx.check_true(query_rows_intact, "dropout leaves the query phase alone");

        SequenceBatch scaled2 = perturb(task.batch, PerturbationSpec::scale(2.0), seed, task.store_len);
        bool lambda_exact = true;
        for (std::size_t t = 0; t < task.batch.length(); ++t) {
            const double before = dot(task.batch.k.row(t), task.batch.k.row(t));
            const double after = dot(scaled2.k.row(t), scaled2.k.row(t));
            if (after != 4.0 * before) lambda_exact = false;
        }
        ctx.check_true(lambda_exact, "scale(2) multiplies every lambda by exactly 4");
        ctx.check_true(scaled2.v == task.batch.v, "values untouched by key scaling");
        SequenceBatch scaledv =
            perturb(task.batch, PerturbationSpec::scale(2.0, true), seed, task.store_len);
        ctx.check_true(scaledv.v != task.batch.v, "scale_values flag reaches the values");
    }

    // repeated-key stress: euler norm ladder vs efla's fixed ceiling
    {
        RecallTask task = gen_repeated_recall(seed + 5, 30, 8, 8);
        const double vnorm = norm2(task.targets.row(0));
        double prev_euler = -1.0;
        bool euler_monotone = true, efla_capped = true, euler_explodes = true;
        for (double s : {1.0, 2.0, 4.0, 8.0}) {
            PerturbationSpec p = PerturbationSpec::scale(s);
            TrialReport re = eval_recall(Method::euler(), task, p, seed + 5);
            TrialReport rf = eval_recall(Method::efla(), task, p, seed + 5);
            if (!(re.max_state_norm >= prev_euler)) euler_monotone = false;
            prev_euler = re.max_state_norm;
            if (s >= 2.0 && !(re.max_state_norm > 1e6)) euler_explodes = false;
            if (!(rf.max_state_norm <= vnorm * (1.0 + 1e-9))) efla_capped = false;
        }
        ctx.check_true(euler_monotone, "euler max norm is non-decreasing in the scale factor");
        ctx.check_true(euler_explodes, "euler norm exceeds 1e6 once s^2 lambda beta > 2");
        ctx.check_true(efla_capped, "efla max norm bounded by the stored value norm");
    }

    {
        RecallTask task = gen_repeated_recall(seed + 6, 800, 8, 8);
        TrialReport re = eval_recall(Method::euler(), task, PerturbationSpec::scale(2.0), seed + 6);
        TrialReport rf = eval_recall(Method::efla(), task, PerturbationSpec::scale(2.0), seed + 6);
        ctx.check_true(re.divergence_index >= 0, "euler diverges at s = 2 within 800 writes");
        ctx.check_true(rf.divergence_index == -1, "efla never diverges at s = 2");
        ctx.check_true(rf.cosine >= 0.99, "efla recall direction survives the scaling");
    }
}

void suite_csv(Ctx& ctx) {
    ctx.check_true(to_csv(std::vector<TrialReport>{}) ==
                       "seed,method,scheme,perturbation,param,mse,cosine,max_state_norm,"
                       "divergence_index\n",
                   "recall header");
    ctx.check_true(to_csv(std::vector<StabilityRow>{}) ==
                       "x,method,measured_factor,predicted_factor,abs_error\n",
                   "stability header");
    ctx.check_true(to_csv(std::vector<ConvergenceRow>{}) == "order,x,error,bound,ratio\n",
                   "convergence header");

    ctx.check_true(format_double(1.0) == "1", "integral doubles print bare");
    ctx.check_true(format_double(0.5) == "0.5", "dyadic doubles print short");
    for (double v : {0.1, std::exp(-1.0), 1.0 / 3.0, 12345.678901234567}) {
        ctx.check_true(std::strtod(format_double(v).c_str(), nullptr) == v,
                       "17-digit round trip is lossless");
    }

    {
        TrialReport r;
        r.seed = 42;
        r.method = "efla";
        r.scheme = "orthonormal";
        r.perturbation = "scale";
        r.param = 2.0;
        r.mse = 1.0 / 3.0;
        r.cosine = 0.99999;
        r.max_state_norm = 17.25;
        r.divergence_index = -1;
        const std::string csv = to_csv(std::vector<TrialReport>{r});
        auto lines = split_lines(csv);
        ctx.check_true(lines.size() == 2, "one report serializes to two lines");
        ctx.check_true(lines[1].rfind("42,efla,orthonormal,scale,2,", 0) == 0,
                       "row prefix fields in order");
        ctx.check_true(csv.find(format_double(1.0 / 3.0)) != std::string::npos,
                       "payload float serialized at 17 digits");
    }

    {
        auto rows = rk_convergence(10, 1.0, 1.0);
        const std::string csv = to_csv(rows);
        auto lines = split_lines(csv);
        ctx.check_true(lines.size() == 11, "10-row table serializes to 11 lines");
        // re-parse and re-serialize: identical text
        std::vector<ConvergenceRow> parsed;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            std::istringstream in(lines[i]);
            std::string cell;
            ConvergenceRow row;
            std::getline(in, cell, ',');
            row.order = static_cast<unsigned>(std::strtoul(cell.c_str(), nullptr, 10));
            std::getline(in, cell, ',');
            row.x = std::strtod(cell.c_str(), nullptr);
            std::getline(in, cell, ',');
            row.error = std::strtod(cell.c_str(), nullptr);
            std::getline(in, cell, ',');
            row.bound = std::strtod(cell.c_str(), nullptr);
            std::getline(in, cell, ',');
            row.ratio = std::strtod(cell.c_str(), nullptr);
            parsed.push_back(row);
        }
        ctx.check_true(to_csv(parsed) == csv, "parse/serialize round trip is exact");
    }
}

}  // namespace efla::verify
