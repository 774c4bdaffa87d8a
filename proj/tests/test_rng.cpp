#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "covbound/rng.hpp"

using namespace covbound;

TEST_SUITE("rng")
{
    TEST_CASE("Philox4x32-10 known answers")
    {
        using C = Philox4x32::Counter;
        using K = Philox4x32::Key;
        CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
        CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
              C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
        CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
              C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    }

    TEST_CASE("streams are reproducible and distinct")
    {
        CounterRng a(42, 3);
        CounterRng b(42, 3);
        CounterRng c(42, 4);
        CounterRng d(43, 3);
        int same_c = 0;
        int same_d = 0;
        for (int i = 0; i < 1000; ++i)
        {
            const auto x = a();
            CHECK(x == b());
            same_c += x == c();
            same_d += x == d();
        }
        CHECK(same_c == 0);
        CHECK(same_d == 0);
    }

    TEST_CASE("works as a standard URBG")
    {
        CounterRng rng(1, 0);
        std::uniform_int_distribution<int> die(1, 6);
        std::vector<int> counts(7, 0);
        for (int i = 0; i < 60000; ++i)
            ++counts[die(rng)];
        for (int k = 1; k <= 6; ++k)
            CHECK(std::abs(counts[k] - 10000) < 500);
    }

    TEST_CASE("uniform stays in the open unit interval")
    {
        CounterRng rng(5, 0);
        double sum = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i)
        {
            const double u = rng.uniform();
            REQUIRE(u > 0.0);
            REQUIRE(u < 1.0);
            sum += u;
        }
        CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    }

    TEST_CASE("normal and chi-square moments")
    {
        CounterRng rng(9, 1);
        const int n = 400000;
        double s1 = 0.0;
        double s2 = 0.0;
        double s4 = 0.0;
        for (int i = 0; i < n; ++i)
        {
            const double z = rng.normal();
            s1 += z;
            s2 += z * z;
            s4 += z * z * z * z;
        }
        CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(n));
        CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
        CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));

        for (double dof : {1.0, 3.0, 20.0})
        {
            double m1 = 0.0;
            double m2 = 0.0;
            for (int i = 0; i < n; ++i)
            {
                const double q = rng.chi_square(dof);
                m1 += q;
                m2 += q * q;
            }
            const double mean = m1 / n;
            const double var = m2 / n - mean * mean;
            CHECK(std::abs(mean - dof) < 4.0 * std::sqrt(2.0 * dof / n));
            CHECK(var == doctest::Approx(2.0 * dof).epsilon(0.03));
        }
    }
}
