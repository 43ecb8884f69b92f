#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "efla/chunkwise.hpp"
#include "efla/rng.hpp"

using namespace efla;

namespace {

SequenceBatch random_batch(std::uint64_t seed, std::size_t l, std::size_t dk, std::size_t dv) {
    SplitMix64 rng(seed);
    SequenceBatch b;
    b.q = Mat(l, dk);
    b.k = Mat(l, dk);
    b.v = Mat(l, dv);
    b.beta.resize(l);
    for (std::size_t t = 0; t < l; ++t) {
        for (std::size_t j = 0; j < dk; ++j) {
            b.q.at(t, j) = rng.next_gaussian();
            // small keys keep x = beta*|k|^2 < 2 so every method is
            // contractive and the comparisons stay at eps scale
            b.k.at(t, j) = 0.3 * rng.next_gaussian();
        }
        for (std::size_t j = 0; j < dv; ++j) b.v.at(t, j) = rng.next_gaussian();
        b.beta[t] = rng.next_uniform(0.0, 1.0);
    }
    return b;
}

}  // namespace

TEST_SUITE("chunkwise") {
    TEST_CASE("argument validation") {
        const SequenceBatch b = random_batch(1, 8, 4, 3);
        CHECK_THROWS_AS(chunk_forward(Method::efla(), b, ChunkPlan{0}), std::invalid_argument);
        CHECK_THROWS_AS(chunk_forward(Method::reference(8), b, ChunkPlan{4}),
                        std::invalid_argument);
        Mat bad_s0(3, 3);
        CHECK_THROWS_AS(chunk_forward(Method::efla(), b, ChunkPlan{4}, &bad_s0),
                        std::invalid_argument);

        CHECK_THROWS_AS(ut_transform(Mat(0, 4), Mat(0, 3), {}), std::invalid_argument);
        CHECK_THROWS_AS(ut_transform(Mat(2, 4), Mat(3, 3), std::vector<double>(2, 0.5)),
                        std::invalid_argument);
        CHECK_THROWS_AS(wy_sequential(Mat(2, 4), Mat(2, 3), std::vector<double>(3, 0.5)),
                        std::invalid_argument);
        CHECK_THROWS_AS(decay_product({}, Method::euler()), std::invalid_argument);
    }

    TEST_CASE("single-token chunk factors") {
        const Mat k(1, 2, {2.0, 0.0});
        const Mat v(1, 1, {3.0});
        const ChunkFactors f = ut_transform(k, v, {0.25});
        CHECK(f.t.at(0, 0) == 0.25);
        CHECK(f.w.at(0, 0) == 0.5);
        CHECK(f.w.at(0, 1) == 0.0);
        CHECK(f.u.at(0, 0) == 0.75);
    }

    TEST_CASE("ut and wy factors agree") {
        SplitMix64 rng(7);
        const std::size_t c = 8, dk = 5, dv = 4;
        Mat keys(c, dk), vals(c, dv);
        std::vector<double> alphas(c);
        for (std::size_t r = 0; r < c; ++r) {
            for (std::size_t j = 0; j < dk; ++j) keys.at(r, j) = 0.5 * rng.next_gaussian();
            for (std::size_t j = 0; j < dv; ++j) vals.at(r, j) = rng.next_gaussian();
            alphas[r] = rng.next_uniform(0.0, 1.2);
        }
        const auto wy = wy_sequential(keys, vals, alphas);
        const ChunkFactors ut = ut_transform(keys, vals, alphas);
        CHECK(max_abs_diff(ut.w, wy.first) < 1e-12);
        CHECK(max_abs_diff(ut.u, wy.second) < 1e-12);
    }

    TEST_CASE("chunked scan matches the sequential one") {
        const SequenceBatch b = random_batch(3, 37, 6, 4);  // 37 = 4 full chunks of 9 + 1
        for (const Method& m : {Method::vanilla(), Method::euler(), Method::efla()}) {
            const ScanResult ref = recurrent_forward(m, b);
            const ScanResult res = chunk_forward(m, b, ChunkPlan{9});
            CHECK(max_abs_diff(res.outputs, ref.outputs) < 1e-10);
            CHECK(max_abs_diff(res.final_state, ref.final_state) < 1e-10);
            CHECK(res.divergence_index == ref.divergence_index);
        }
    }

    TEST_CASE("chunked scan carries an initial state") {
        const SequenceBatch b = random_batch(5, 12, 4, 4);
        SplitMix64 rng(11);
        Mat s0(4, 4);
        for (std::size_t i = 0; i < 16; ++i) s0.data()[i] = rng.next_gaussian();
        const ScanResult ref = recurrent_forward(Method::efla(), b, &s0);
        const ScanResult res = chunk_forward(Method::efla(), b, ChunkPlan{5}, &s0);
        CHECK(max_abs_diff(res.outputs, ref.outputs) < 1e-12);
        CHECK(max_abs_diff(res.final_state, ref.final_state) < 1e-12);
    }

    TEST_CASE("decay product equals the WY-form operator") {
        SplitMix64 rng(13);
        const std::size_t c = 6, dk = 4;
        Mat keys(c, dk), vals(c, 3);
        std::vector<StepInput> inputs;
        for (std::size_t r = 0; r < c; ++r) {
            Vec k(dk), v(3);
            for (std::size_t j = 0; j < dk; ++j) k[j] = 0.5 * rng.next_gaussian();
            for (std::size_t j = 0; j < 3; ++j) v[j] = rng.next_gaussian();
            std::copy_n(k.data(), dk, keys.row(r).data());
            std::copy_n(v.data(), 3, vals.row(r).data());
            inputs.push_back({k, v, 0.9});
        }
        std::vector<double> alphas(c);
        for (std::size_t r = 0; r < c; ++r)
            alphas[r] = coefficients(Method::efla(), 0.9, dot(keys.row(r), keys.row(r))).c_transition;

        const Mat p = decay_product(inputs, Method::efla());
        const auto wy = wy_sequential(keys, vals, alphas);
        Mat expect = Mat::identity(dk);
        for (std::size_t r = 0; r < c; ++r)
            for (std::size_t i = 0; i < dk; ++i)
                for (std::size_t j = 0; j < dk; ++j)
                    expect.at(i, j) -= keys.at(r, i) * wy.first.at(r, j);
        CHECK(max_abs_diff(p, expect) < 1e-12);
    }
}
