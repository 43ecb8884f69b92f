#include "efla/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <limits>
#include <stdexcept>
#include <vector>

#include "efla/kernels.hpp"

namespace efla {

Method Method::rkn(unsigned order) {
    if (order < 1) throw std::invalid_argument("Method::rkn: order must be >= 1");
    return {MethodKind::RKN, order, 0};
}

Method Method::reference(unsigned substeps) {
    if (substeps < 1) throw std::invalid_argument("Method::reference: substeps must be >= 1");
    return {MethodKind::Reference, 0, substeps};
}

bool Method::is_ode_family() const {
    switch (kind) {
        case MethodKind::DeltaEuler:
        case MethodKind::RK2:
        case MethodKind::RK4:
        case MethodKind::RKN:
        case MethodKind::ExactEFLA:
            return true;
        default:
            return false;
    }
}

std::string Method::name() const {
    switch (kind) {
        case MethodKind::VanillaLinear: return "vanilla";
        case MethodKind::DeltaEuler: return "euler";
        case MethodKind::RK2: return "rk2";
        case MethodKind::RK4: return "rk4";
        case MethodKind::RKN: return "rk" + std::to_string(order);
        case MethodKind::ExactEFLA: return "efla";
        case MethodKind::Reference: return "reference";
    }
    return "unknown";
}

Method Method::parse(std::string_view text) {
    if (text == "vanilla") return vanilla();
    if (text == "euler") return euler();
    if (text == "efla") return efla();
    if (text == "reference") return reference(1024);
    if (text.rfind("reference:", 0) == 0) {
        std::string_view num = text.substr(10);
        unsigned n = 0;
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
        if (ec != std::errc{} || p != num.data() + num.size() || n < 1)
            throw std::invalid_argument("Method::parse: bad substep count in '" + std::string(text) + "'");
        return reference(n);
    }
    if (text.rfind("rk", 0) == 0) {
        std::string_view num = text.substr(2);
        unsigned n = 0;
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
        if (ec != std::errc{} || p != num.data() + num.size() || n < 1)
            throw std::invalid_argument("Method::parse: bad RK order in '" + std::string(text) + "'");
        if (n == 2) return rk2();
        if (n == 4) return rk4();
        return rkn(n);
    }
    throw std::invalid_argument("Method::parse: unknown method '" + std::string(text) + "'");
}

std::pair<double, double> series_phi(unsigned order, double x) {
    if (order < 1) throw std::invalid_argument("series_phi: order must be >= 1");
    if (x < 0.0 || !std::isfinite(x)) throw std::invalid_argument("series_phi: x must be finite and >= 0");
    std::vector<double> invfact(order + 1);
    invfact[0] = 1.0;
    for (unsigned m = 1; m <= order; ++m) invfact[m] = invfact[m - 1] / m;
    double phi0 = invfact[order];
    for (unsigned m = order; m-- > 0;) phi0 = invfact[m] - x * phi0;
    double phi1 = invfact[order];
    for (unsigned m = order - 1; m >= 1; --m) phi1 = invfact[m] - x * phi1;
    return {phi0, phi1};
}

StepCoefficients coefficients(const Method& m, double beta, double lambda) {
    if (beta < 0.0 || lambda < 0.0 || !std::isfinite(beta) || !std::isfinite(lambda))
        throw std::invalid_argument("coefficients: beta and lambda must be finite and >= 0");
    switch (m.kind) {
        case MethodKind::VanillaLinear:
            return {0.0, 1.0};
        case MethodKind::DeltaEuler:
            return {beta, beta};
        case MethodKind::RK2:
        case MethodKind::RK4:
        case MethodKind::RKN: {
            double c = beta * series_phi(m.order, beta * lambda).second;
            return {c, c};
        }
        case MethodKind::ExactEFLA: {
            double a = decay_gate(beta, lambda).alpha;
            return {a, a};
        }
        case MethodKind::Reference:
            break;
    }
    throw std::invalid_argument("coefficients: reference method has no one-step coefficients");
}

void step_core(const Method& m, Mat& s, std::span<const double> k, std::span<const double> v,
               double beta, Vec& scratch) {
    if (s.rows() != k.size()) throw std::invalid_argument("step: rows(S) != len(k)");
    if (s.cols() != v.size()) throw std::invalid_argument("step: cols(S) != len(v)");
    if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("step: beta must be finite and >= 0");
    const Kernels& kn = active();
    if (m.kind == MethodKind::Reference) {
        s = reference_step(s, k, v, beta, m.substeps);
        return;
    }
    if (m.kind == MethodKind::VanillaLinear) {
        kn.rank1_update(s.rows(), s.cols(), 1.0, k.data(), v.data(), s.data());
        return;
    }
    if (scratch.size() != s.cols()) throw std::invalid_argument("step: scratch size != cols(S)");
    const double lambda = kn.sumsq(k.size(), k.data());
    const double c = coefficients(m, beta, lambda).c_transition;
    kn.mat_tvec(s.rows(), s.cols(), s.data(), k.data(), scratch.data());
    kn.scal(scratch.size(), -c, scratch.data());
    kn.axpy(scratch.size(), c, v.data(), scratch.data());
    kn.rank1_update(s.rows(), s.cols(), 1.0, k.data(), scratch.data(), s.data());
}

void step_inplace(const Method& m, Mat& s, const StepInput& in, Vec& scratch) {
    step_core(m, s, in.k.span(), in.v.span(), in.beta, scratch);
}

Mat step(const Method& m, const Mat& s, const StepInput& in) {
    Mat out = s;
    Vec scratch(s.cols());
    step_core(m, out, in.k.span(), in.v.span(), in.beta, scratch);
    return out;
}

Mat reference_step(const Mat& s, std::span<const double> k, std::span<const double> v, double beta,
                   unsigned substeps) {
    if (substeps < 1) throw std::invalid_argument("reference_step: substeps must be >= 1");
    if (s.rows() != k.size()) throw std::invalid_argument("reference_step: rows(S) != len(k)");
    if (s.cols() != v.size()) throw std::invalid_argument("reference_step: cols(S) != len(v)");
    if (!std::isfinite(beta) || beta < 0.0)
        throw std::invalid_argument("reference_step: beta must be finite and >= 0");
    Mat cur = s;
    if (beta == 0.0) return cur;
    const std::size_t r = s.rows(), c = s.cols(), n = r * c;
    const Kernels& kn = active();
    Mat bmat(r, c);
    kn.rank1_update(r, c, 1.0, k.data(), v.data(), bmat.data());
    Mat y(r, c), y2(r, c), acc(r, c);
    Vec t(c);
    const double h = beta / substeps;
    for (unsigned i = 0; i < substeps; ++i) {
        std::fill_n(acc.data(), n, 0.0);
        kn.mat_tvec(r, c, cur.data(), k.data(), t.data());
        kn.rk_stage(r, c, cur.data(), bmat.data(), k.data(), t.data(), 0.5 * h, h / 6.0, y.data(), acc.data());
        kn.mat_tvec(r, c, y.data(), k.data(), t.data());
        kn.rk_stage(r, c, cur.data(), bmat.data(), k.data(), t.data(), 0.5 * h, h / 3.0, y2.data(), acc.data());
        kn.mat_tvec(r, c, y2.data(), k.data(), t.data());
        kn.rk_stage(r, c, cur.data(), bmat.data(), k.data(), t.data(), h, h / 3.0, y.data(), acc.data());
        kn.mat_tvec(r, c, y.data(), k.data(), t.data());
        kn.rk_stage(r, c, cur.data(), bmat.data(), k.data(), t.data(), 0.0, h / 6.0, y2.data(), acc.data());
        kn.axpy(n, 1.0, acc.data(), cur.data());
    }
    return cur;
}

Mat reference_step(const Mat& s, const StepInput& in, unsigned substeps) {
    return reference_step(s, in.k.span(), in.v.span(), in.beta, substeps);
}

namespace {

// Exact propagator pair over one token: trans = e^{-beta A} and
// input_op = integral_0^beta e^{-tau A} dtau, built by Taylor expansion
// on a halved interval followed by repeated doubling. Halving keeps the
// series argument below 1/2 so the alternating terms never dwarf the
// sum -- raw Taylor at beta*lambda ~ 10 would cancel away five digits.
// Doubling uses trans(2h) = trans(h)^2, input_op(2h) = (trans(h) + I) input_op(h).
std::pair<Mat, Mat> exact_operators(const Mat& a, double beta, double anorm) {
    const std::size_t d = a.rows();
    unsigned halvings = 0;
    double h = beta;
    while (h * anorm > 0.5 && halvings < 80) {
        h *= 0.5;
        ++halvings;
    }
    Mat term = Mat::identity(d);  // (-h)^n A^n / n!
    Mat trans(d, d);
    Mat input_op(d, d);
    for (unsigned n = 0; n < 60; ++n) {
        trans = add(trans, term);
        input_op = add(input_op, scaled(term, h / (n + 1)));
        double mag = max_abs(term);
        if (mag <= 1e-22 * (1.0 + max_abs(trans)) && n > 1) break;
        term = scaled(matmul(term, a), -h / (n + 1));
    }
    for (unsigned i = 0; i < halvings; ++i) {
        input_op = add(matmul(trans, input_op), input_op);
        trans = matmul(trans, trans);
    }
    return {std::move(trans), std::move(input_op)};
}

}  // namespace

ExplicitOperators explicit_operators(const Method& m, const StepInput& in) {
    if (m.kind == MethodKind::VanillaLinear || m.kind == MethodKind::Reference)
        throw std::invalid_argument("explicit_operators: only defined for the ODE-family methods");
    if (in.beta < 0.0 || !std::isfinite(in.beta))
        throw std::invalid_argument("explicit_operators: beta must be finite and >= 0");
    const std::size_t d = in.k.size();
    Mat a = outer(in.k, in.k);
    Mat trans(d, d);
    Mat input_op(d, d);
    if (m.kind == MethodKind::ExactEFLA) {
        auto [t, io] = exact_operators(a, in.beta, squared_norm(in.k));
        trans = std::move(t);
        input_op = std::move(io);
    } else {
        Mat term = Mat::identity(d);  // (-beta)^n A^n / n!
        for (unsigned n = 0;; ++n) {
            trans = add(trans, term);
            if (n < m.order) input_op = add(input_op, scaled(term, in.beta / (n + 1)));
            if (n == m.order) break;
            term = scaled(matmul(term, a), -in.beta / (n + 1));
        }
    }
    ExplicitOperators out;
    out.transition = std::move(trans);
    Mat bmat = outer(in.k, in.v);
    out.input_term = matmul(input_op, bmat);
    return out;
}

}  // namespace efla
