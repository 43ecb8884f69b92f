#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "efla/kernels.hpp"

using namespace efla;

TEST_SUITE("kernels") {
    TEST_CASE("scalar lane basics") {
        const Kernels& kn = kernels::scalar();
        CHECK(std::string(kn.name) == "scalar");

        const double a[] = {1.0, 2.0, 3.0};
        const double b[] = {4.0, 5.0, 6.0};
        CHECK(kn.dot(3, a, b) == 32.0);
        CHECK(kn.dot(0, a, b) == 0.0);
        const double x[] = {3.0, -4.0};
        CHECK(kn.sumsq(2, x) == 25.0);

        double y[] = {1.0, 1.0, 1.0};
        kn.axpy(3, 2.0, a, y);
        CHECK(y[0] == 3.0);
        CHECK(y[1] == 5.0);
        CHECK(y[2] == 7.0);
        kn.scal(3, 0.5, y);
        CHECK(y[0] == 1.5);
        CHECK(y[2] == 3.5);
    }

    TEST_CASE("scalar matrix kernels") {
        const Kernels& kn = kernels::scalar();
        // S = [[1,2,3],[4,5,6]], k = {1, 10}: S^T k = {41, 52, 63}
        const double s[] = {1, 2, 3, 4, 5, 6};
        const double k[] = {1.0, 10.0};
        double out[3];
        kn.mat_tvec(2, 3, s, k, out);
        CHECK(out[0] == 41.0);
        CHECK(out[1] == 52.0);
        CHECK(out[2] == 63.0);

        double m[] = {0.0, 0.0, 0.0, 0.0};  // 2x2
        const double u[] = {1.0, 2.0};
        const double v[] = {3.0, 4.0};
        kn.rank1_update(2, 2, 2.0, u, v, m);
        CHECK(m[0] == 6.0);
        CHECK(m[1] == 8.0);
        CHECK(m[2] == 12.0);
        CHECK(m[3] == 16.0);
    }

    TEST_CASE("rk_stage fuses slope, accumulator and stage state") {
        const Kernels& kn = kernels::scalar();
        // 1x2: slope = bmat - k*t = {3-2*0.5, 4-2*1} = {2, 2}
        const double s[] = {1.0, 2.0};
        const double bmat[] = {3.0, 4.0};
        const double k[] = {2.0};
        const double t[] = {0.5, 1.0};
        double y[2];
        double acc[] = {0.0, 0.0};
        kn.rk_stage(1, 2, s, bmat, k, t, 0.5, 0.25, y, acc);
        CHECK(y[0] == 2.0);
        CHECK(y[1] == 3.0);
        CHECK(acc[0] == 0.5);
        CHECK(acc[1] == 0.5);
    }

    TEST_CASE("lane selection") {
        const std::string prev = active().name;
        CHECK_THROWS_AS(kernels::select("bogus"), std::invalid_argument);

        kernels::select("scalar");
        CHECK(std::string(active().name) == "scalar");
        kernels::select("auto");
        const std::string picked = active().name;
        CHECK((picked == "scalar" || picked == "avx2"));

        if (kernels::avx2_available()) {
            kernels::select("avx2");
            CHECK(std::string(active().name) == "avx2");
        } else {
            CHECK_THROWS_AS(kernels::select("avx2"), std::invalid_argument);
        }
        kernels::select(prev.c_str());
    }

    TEST_CASE("lanes agree on an awkward odd length") {
        if (!kernels::avx2_available()) return;
        const std::string prev = active().name;
        const Kernels& sc = kernels::scalar();
        kernels::select("avx2");
        const Kernels& vx = active();
        std::vector<double> a(13), b(13);
        for (int i = 0; i < 13; ++i) {
            a[i] = 0.3 * i - 1.7;
            b[i] = 1.1 - 0.2 * i;
        }
        CHECK(std::abs(sc.dot(13, a.data(), b.data()) - vx.dot(13, a.data(), b.data())) < 1e-12);
        CHECK(std::abs(sc.sumsq(13, a.data()) - vx.sumsq(13, a.data())) < 1e-12);
        kernels::select(prev.c_str());
    }
}
