#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qsdc/adversary.hpp"
#include "qsdc/statevector.hpp"

using namespace qsdc;

namespace {

constexpr double kGolden = 1e-12;
const double kH = 1.0 / std::sqrt(2.0);

void expect_amps(const StateVector& s, const std::vector<Amplitude>& expected, double tol = kGolden)
{
    ASSERT_EQ(s.dimension(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
        EXPECT_LT(std::abs(s[i] - expected[i]), tol) << "amplitude " << i;
}

} // namespace

TEST(MakePair, SymmetricCase)
{
    expect_amps(make_pair(kH, kH), {kH, 0, 0, kH});
}

TEST(MakePair, ProductStateWhenBIsZero)
{
    expect_amps(make_pair(1.0, 0.0), {1, 0, 0, 0});
}

TEST(MakePair, ThreeFourFive)
{
    const auto s = make_pair(0.6, 0.8);
    expect_amps(s, {0.6, 0, 0, 0.8});
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
}

TEST(MakePair, RejectsUnnormalized)
{
    try {
        make_pair(1.0, 1.0);
        FAIL() << "expected NotNormalized";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_normalized);
    }
    EXPECT_THROW(qsdc::make_pair(Amplitude(NAN, 0), 0.0), error);
}

TEST(MakeDecoy, FourStates)
{
    expect_amps(make_decoy(DecoyState::Zero), {1, 0});
    expect_amps(make_decoy(DecoyState::One), {0, 1});
    expect_amps(make_decoy(DecoyState::Plus), {kH, kH});
    expect_amps(make_decoy(DecoyState::Minus), {kH, -kH});
}

TEST(Tensor, MessageQubitZeroGivesAZeroZeroZeroPlusBZeroOneOne)
{
    const Amplitude a(0.6, 0.0), b(0.0, 0.8);
    const auto s = tensor(StateVector::qubit(0), make_pair(a, b));
    // order (a, A, B): a|000> + b|011>
    expect_amps(s, {a, 0, 0, b, 0, 0, 0, 0});
    EXPECT_EQ(s.num_subsystems(), 3u);
}

TEST(Tensor, MessageQubitOne)
{
    const Amplitude a(0.6, 0.0), b(0.0, 0.8);
    expect_amps(tensor(StateVector::qubit(1), make_pair(a, b)), {0, 0, 0, 0, a, 0, 0, b});
}

TEST(Tensor, ZeroZero)
{
    expect_amps(tensor(StateVector::qubit(0), StateVector::qubit(0)), {1, 0, 0, 0});
}

TEST(Tensor, BigEndianOrdering)
{
    // |1>|0>|1> sits at 0b101.
    const auto s = tensor(tensor(StateVector::qubit(1), StateVector::qubit(0)), StateVector::qubit(1));
    EXPECT_EQ(s[5], Amplitude(1.0));
}

TEST(Tensor, RejectsOversizedRegister)
{
    const StateVector big({4, 4, 4}, std::vector<Amplitude>(64, 1.0 / 8.0));
    EXPECT_THROW(tensor(big, StateVector::qubit(0)), error);
}

TEST(Cnot, EncodesZero)
{
    const Amplitude a(0.6, 0.0), b(0.8, 0.0);
    const auto s = apply_cnot(tensor(StateVector::qubit(0), make_pair(a, b)), 1, 0);
    expect_amps(s, {a, 0, 0, 0, 0, 0, 0, b}); // a|000> + b|111>
}

TEST(Cnot, EncodesOne)
{
    const Amplitude a(0.6, 0.0), b(0.8, 0.0);
    const auto s = apply_cnot(tensor(StateVector::qubit(1), make_pair(a, b)), 1, 0);
    expect_amps(s, {0, 0, 0, b, a, 0, 0, 0}); // a|100> + b|011>
}

TEST(Cnot, ControlZeroIsIdentity)
{
    const auto zz = tensor(StateVector::qubit(0), StateVector::qubit(0));
    EXPECT_EQ(apply_cnot(zz, 0, 1), zz);
    EXPECT_EQ(apply_cnot(zz, 1, 0), zz);
}

TEST(Cnot, Errors)
{
    const auto zz = tensor(StateVector::qubit(0), StateVector::qubit(0));
    try {
        apply_cnot(zz, 1, 1);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::same_index);
    }
    try {
        apply_cnot(zz, 0, 2);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::index_out_of_range);
    }
    const StateVector with_ancilla({2, 4}, {1, 0, 0, 0, 0, 0, 0, 0});
    EXPECT_THROW(apply_cnot(with_ancilla, 0, 1), error);
}

TEST(Cnot, MatchesPermutationMatrixOracle)
{
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = oracle::random_state({2, 2, 2}, rng);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t t = 0; t < 3; ++t) {
                if (c == t)
                    continue;
                const auto expected = oracle::matvec(oracle::cnot_matrix(3, c, t), oracle::to_vec(s));
                expect_amps(apply_cnot(s, c, t), expected);
            }
    }
}

TEST(Measure, EigenstateGivesEigenvalueForAnyRand)
{
    for (double r : {0.0, 0.3, 0.999999, std::nextafter(1.0, 0.0)}) {
        const auto m = measure(make_decoy(DecoyState::Plus), 0, Basis::X, r);
        EXPECT_EQ(m.record.outcome, 0);
        EXPECT_NEAR(m.record.outcome_prob, 1.0, 1e-12);
        const auto m2 = measure(make_decoy(DecoyState::Minus), 0, Basis::X, r);
        EXPECT_EQ(m2.record.outcome, 1);
    }
}

TEST(Measure, CollapsesEncodedState)
{
    const double a = 0.6, b = 0.8;
    const auto s = apply_cnot(tensor(StateVector::qubit(0), make_pair(a, b)), 1, 0);
    const auto m = measure(s, 0, Basis::Z, 0.3); // 0.3 < |a|^2
    EXPECT_EQ(m.record.outcome, 0);
    EXPECT_NEAR(m.record.outcome_prob, 0.36, 1e-12);
    expect_amps(m.state, {1, 0, 0, 0, 0, 0, 0, 0});

    const auto m1 = measure(s, 0, Basis::Z, 0.5);
    EXPECT_EQ(m1.record.outcome, 1);
    EXPECT_NEAR(m1.record.outcome_prob, 0.64, 1e-12);
    expect_amps(m1.state, {0, 0, 0, 0, 0, 0, 0, 1});
}

TEST(Measure, BellPairIsUnbiased)
{
    const auto p = z_probabilities(make_pair(kH, kH), 0);
    EXPECT_NEAR(p[0], 0.5, 1e-12);
    EXPECT_NEAR(p[1], 0.5, 1e-12);
}

TEST(Measure, XBasisCollapseLeavesEigenstate)
{
    const auto m = measure(make_decoy(DecoyState::Zero), 0, Basis::X, 0.7);
    EXPECT_EQ(m.record.outcome, 1);
    EXPECT_NEAR(m.record.outcome_prob, 0.5, 1e-12);
    expect_amps(m.state, {kH, -kH});
}

TEST(Measure, RejectsBadIndex)
{
    EXPECT_THROW(measure(make_pair(kH, kH), 2, Basis::Z, 0.1), error);
}

TEST(Isometry, IdentityProbeFactorsOut)
{
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = oracle::random_state({2, 2}, rng);
        const auto out = apply_isometry(s, 1, identity_probe());
        expect_amps(out, oracle::kron(oracle::to_vec(s), oracle::Vec{1.0, 0.0, 0.0, 0.0}));
    }
}

TEST(Isometry, OrthonormalDefaultProbeTagsBasisStates)
{
    Rng rng(3);
    const auto s = oracle::random_state({2}, rng);
    const auto out = apply_isometry(s, 0, ProbeIsometry{});
    ASSERT_EQ(out.dims().size(), 2u);
    EXPECT_EQ(out.dims()[1], kAncillaDim);
    // |q>|eps_q> with eps00 = e0, eps11 = e3
    std::vector<Amplitude> expected(8);
    expected[0 * 4 + 0] = s[0];
    expected[1 * 4 + 3] = s[1];
    expect_amps(out, expected);
}

TEST(Isometry, ZeroInputWithGenericProbe)
{
    ProbeIsometry iso;
    iso.alpha = Amplitude(0.6, 0.0);
    iso.beta = Amplitude(0.0, 0.8);
    iso.beta_p = Amplitude(0.8, 0.0);
    iso.alpha_p = Amplitude(-0.6, 0.0);
    const auto out = apply_isometry(StateVector::qubit(0), 0, iso);
    std::vector<Amplitude> expected(8);
    for (std::size_t j = 0; j < 4; ++j) {
        expected[j] = iso.alpha * iso.eps00[j];
        expected[4 + j] = iso.beta * iso.eps01[j];
    }
    expect_amps(out, expected);
}

TEST(Isometry, MatchesDenseMatrixOracleInsideRegister)
{
    // Probe on qubit B of (A, B) must equal (I2 (x) E) acting on the pair.
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const ProbeIsometry iso = random_probe(rng);
        const auto s = oracle::random_state({2, 2}, rng);
        const auto expected = oracle::matvec(oracle::kron(oracle::Mat::identity(2), oracle::probe_matrix(iso)),
                                            oracle::to_vec(s));
        expect_amps(apply_isometry(s, 1, iso), expected);
    }
}

TEST(Isometry, RejectsInvalidProbe)
{
    ProbeIsometry iso;
    iso.beta = 1.0;
    try {
        apply_isometry(StateVector::qubit(0), 0, iso);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::invalid_isometry);
    }
}

// Property tests over random instances.

TEST(StateVectorProperties, NormPreservedByGates)
{
    Rng rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = oracle::random_state({2, 2, 2}, rng);
        const std::size_t c = rng.below(3);
        const std::size_t t = (c + 1 + rng.below(2)) % 3;
        EXPECT_NEAR(apply_cnot(s, c, t).norm_squared(), 1.0, 1e-9);
        EXPECT_NEAR(apply_single_qubit(s, rng.below(3), hadamard()).norm_squared(), 1.0, 1e-9);
        EXPECT_NEAR(measure(s, rng.below(3), rng.bit() ? Basis::X : Basis::Z, rng.uniform()).state.norm_squared(), 1.0,
                    1e-9);
    }
}

TEST(StateVectorProperties, CnotIsAnInvolution)
{
    Rng rng(202);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = oracle::random_state({2, 2, 2}, rng);
        const std::size_t c = rng.below(3);
        const std::size_t t = (c + 1 + rng.below(2)) % 3;
        const auto back = apply_cnot(apply_cnot(s, c, t), c, t);
        for (std::size_t i = 0; i < s.dimension(); ++i)
            ASSERT_LT(std::abs(back[i] - s[i]), 1e-12);
    }
}

TEST(StateVectorProperties, BornCompleteness)
{
    Rng rng(303);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = oracle::random_state({2, 4, 2}, rng);
        for (std::size_t k : {std::size_t{0}, std::size_t{2}})
            for (Basis b : {Basis::Z, Basis::X}) {
                const auto p = outcome_probabilities(s, k, b);
                ASSERT_NEAR(p[0] + p[1], 1.0, 1e-9);
            }
    }
}

TEST(StateVectorProperties, PairsArePerfectlyZCorrelated)
{
    Rng rng(404);
    for (int trial = 0; trial < 1000; ++trial) {
        auto [a, b] = oracle::random_pair_amplitudes(rng);
        if (trial == 0)
            a = 1.0, b = 0.0;
        if (trial == 1)
            a = 0.0, b = 1.0;
        const auto first = measure(make_pair(a, b), 0, Basis::Z, rng.uniform());
        const auto second = measure(first.state, 1, Basis::Z, rng.uniform());
        ASSERT_EQ(first.record.outcome, second.record.outcome);
        ASSERT_NEAR(second.record.outcome_prob, 1.0, 1e-12);
    }
}
