#include <gtest/gtest.h>

#include <random>

#include "freepulse/dynamics.hpp"
#include "test_support.hpp"

using namespace freepulse;

namespace {

PulseSchedule constant_drive(cplx a, int duration_dt, int qubit = 0) {
  return PulseSchedule({{ChannelId::drive(qubit), {{duration_dt, a}}}});
}

DeviceModel noisy_qubit(double t1_ns, double t2_ns) {
  return parse_device("dt_ns = 1\n[qubit.0]\nfreq_z = 5.0\ncoupling_rate = 0.05\nt1 = " + std::to_string(t1_ns) +
                          "\nt2 = " + std::to_string(t2_ns) + "\n",
                      "noisy");
}

/// exp(-i t (a.sigma)) applied to |0>, closed form.
StateVector su2_from_zero(double ax, double ay, double az, double t) {
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  const cplx i(0.0, 1.0);
  const double c = std::cos(n * t);
  const double s = n > 0.0 ? std::sin(n * t) / n : t;
  StateVector out(2);
  out << c - i * s * az, -i * s * cplx(ax, ay);
  return out;
}

}  // namespace

TEST(Frames, ParseAndNames) {
  EXPECT_EQ(parse_frame("lab"), Frame::Lab);
  EXPECT_EQ(parse_frame("rwa"), Frame::RWA);
  EXPECT_EQ(parse_frame("rotating"), Frame::Rotating);
  EXPECT_EQ(to_string(Frame::Rotating), "rotating");
  EXPECT_THROW(parse_frame("dressed"), UnknownName);
}

TEST(Frames, RwaIsSingleQubitOnly) {
  EXPECT_THROW(HamiltonianModel(preset_device("chain_3q"), Frame::RWA), FrameUnsupported);
  EXPECT_NO_THROW(HamiltonianModel(preset_device("chain_3q"), Frame::Rotating));
}

TEST(Assemble, RwaGeneratorMatchesDriveTerm) {
  const auto dev = preset_device("h2_1q");
  const cplx d(-0.3, 0.4);
  const ComplexMatrix h = assemble(dev, constant_drive(d, 1), Frame::RWA, 0.5 * dev.dt());
  const double om = kTwoPi * dev.qubits[0].coupling_rate;
  const ComplexMatrix expected = om * (d.real() * pauli::X() + d.imag() * pauli::Y());
  EXPECT_LT((h - expected).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_THROW(assemble(dev, constant_drive(d, 1), Frame::RWA, 2.0 * dev.dt()), PreconditionError);
}

TEST(Propagate, RwaConstantPulseMatchesClosedForm) {
  const auto dev = preset_device("h2_1q");
  const double om = kTwoPi * dev.qubits[0].coupling_rate;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int trial = 0; trial < 10; ++trial) {
    const cplx d(u(rng), u(rng));
    const int n = 1 + trial % 4;
    const StateVector psi = propagate_state(dev, constant_drive(d, n), Frame::RWA, basis_state(2, 0));
    const StateVector ref = su2_from_zero(om * d.real(), om * d.imag(), 0.0, n * dev.dt());
    EXPECT_GT(oracle::fidelity(psi, ref), 1.0 - 1e-12);
  }
}

TEST(Propagate, RwaStudyPulseReachesPublishedState) {
  const auto dev = preset_device("h2_1q");
  const cplx d(-0.07047161691763452, -0.26610396687855536);
  const StateVector psi = propagate_state(dev, constant_drive(d, 1), Frame::RWA, basis_state(2, 0));
  StateVector published(2);
  published << cplx(0.98916, -0.10355), cplx(-0.0973245, 0.0369881);
  EXPECT_GE(oracle::fidelity(psi, published.normalized()), 0.9999);
}

TEST(Propagate, LabFrameAgreesWithRwaForWeakDrive) {
  const auto dev = preset_device("h2_1q");
  const cplx d(0.05, -0.08);
  const int n = 3;
  const StateVector lab = propagate_state(dev, constant_drive(d, n), Frame::Lab, basis_state(2, 0));
  const StateVector rwa = propagate_state(dev, constant_drive(d, n), Frame::RWA, basis_state(2, 0));
  // back to the frame co-rotating with the qubit
  const double w = kTwoPi * dev.qubits[0].freq_z;
  const StateVector rotated = expm_herm_generator(0.5 * w * pauli::Z(), n * dev.dt()) * lab;
  EXPECT_GT(oracle::fidelity(rotated, rwa), 0.999);
}

TEST(Propagate, ExchangeSwapsResonantExcitation) {
  const auto dev = parse_device(
      "dt_ns = 1\n[qubit.0]\nfreq_z = 5.0\ncoupling_rate = 0.1\n[qubit.1]\nfreq_z = 5.0\ncoupling_rate = "
      "0.1\n[edge.0.1]\nj = 0.01\n",
      "pair");
  const PulseSchedule idle({{ChannelId::drive(0), {{10, {}}}}});
  const StateVector psi = propagate_state(dev, idle, Frame::Rotating, basis_state(4, 1));
  const double jt = kTwoPi * 0.01e9 * 10e-9;
  EXPECT_NEAR(std::norm(psi(2)), std::pow(std::sin(jt), 2), 1e-12);
  EXPECT_NEAR(std::norm(psi(1)), std::pow(std::cos(jt), 2), 1e-12);
}

TEST(Propagate, PreservesNormForRandomPulses) {
  const auto dev = preset_device("chain_3q");
  const auto channels = enumerate_channels(dev, true);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int trial = 0; trial < 5; ++trial) {
    std::map<ChannelId, std::vector<Segment>> segs;
    for (const auto& ch : channels) segs[ch] = {{3, {u(rng), u(rng)}}, {2, {u(rng), u(rng)}}};
    const StateVector psi0 = oracle::random_state(8, rng);
    const StateVector psi = propagate_state(dev, PulseSchedule(segs), Frame::Rotating, psi0);
    EXPECT_LT(norm_defect(psi), 1e-12);
  }
}

TEST(Propagate, SubstepRefinementIsSecondOrder) {
  // Midpoint steps: halving the step quarters the error.
  const auto dev = preset_device("chain_3q");
  std::map<ChannelId, std::vector<Segment>> segs;
  segs[ChannelId::drive(0)] = {{2, {0.4, -0.2}}};
  segs[ChannelId::control(0, 1)] = {{2, {0.3, 0.5}}};
  const PulseSchedule s(segs);
  const StateVector psi0 = basis_state(8, 0);
  const StateVector a = propagate_state(dev, s, Frame::Lab, psi0, 64);
  const StateVector b = propagate_state(dev, s, Frame::Lab, psi0, 128);
  const StateVector c = propagate_state(dev, s, Frame::Lab, psi0, 256);
  const double ratio = (a - b).norm() / (b - c).norm();
  EXPECT_NEAR(ratio, 4.0, 0.5);
  // the default resolution is already converged to the percent level
  const StateVector def = propagate_state(dev, s, Frame::Lab, psi0);
  EXPECT_GT(oracle::fidelity(def, c), 0.99);
}

TEST(Propagate, RejectsBadInput) {
  const auto dev = preset_device("h2_1q");
  StateVector bad(2);
  bad << 1.0, 1.0;
  EXPECT_THROW(propagate_state(dev, constant_drive({0.1, 0.0}, 1), Frame::RWA, bad), PreconditionError);
  EXPECT_THROW(propagate_state(dev, constant_drive({0.1, 0.0}, 1), Frame::RWA, basis_state(4, 0)), DimMismatch);
  EXPECT_THROW(propagate_state(dev, constant_drive({0.1, 0.0}, 1, 1), Frame::RWA, basis_state(2, 0)),
               TopologyMismatch);
  const PulseSchedule no_edge({{ChannelId::control(0, 2), {{1, {0.1, 0.0}}}}});
  EXPECT_THROW(propagate_state(preset_device("chain_3q"), no_edge, Frame::Rotating, basis_state(8, 0)),
               TopologyMismatch);
  EXPECT_THROW(propagate_state(dev, constant_drive({0.1, 0.0}, 1), Frame::RWA, basis_state(2, 0), -1),
               PreconditionError);
}

TEST(Density, NoiselessMatchesStatevector) {
  const auto dev = preset_device("chain_3q");
  std::map<ChannelId, std::vector<Segment>> segs;
  segs[ChannelId::drive(1)] = {{4, {0.2, 0.6}}};
  segs[ChannelId::control(1, 2)] = {{4, {-0.5, 0.1}}};
  const PulseSchedule s(segs);
  std::mt19937_64 rng(6);
  const StateVector psi0 = oracle::random_state(8, rng);
  const StateVector psi = propagate_state(dev, s, Frame::Rotating, psi0);
  const ComplexMatrix rho =
      propagate_density(dev, s, Frame::Rotating, psi0 * psi0.adjoint(), NoiseModel::ideal(3));
  EXPECT_LT((rho - psi * psi.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Density, IdleRelaxationFollowsT1AndT2) {
  const double t1 = 100.0;
  const double t2 = 80.0;
  const auto dev = noisy_qubit(t1, t2);
  const auto noise = NoiseModel::from_device(dev);
  const int n = 37;
  const PulseSchedule idle({{ChannelId::drive(0), {{n, {}}}}});
  const ComplexMatrix excited = basis_state(2, 1) * basis_state(2, 1).adjoint();
  const ComplexMatrix r1 = propagate_density(dev, idle, Frame::RWA, excited, noise);
  EXPECT_NEAR(r1(1, 1).real(), std::exp(-n / t1), 1e-12);
  StateVector plus(2);
  plus << 1.0, 1.0;
  plus /= std::sqrt(2.0);
  const ComplexMatrix r2 = propagate_density(dev, idle, Frame::RWA, plus * plus.adjoint(), noise);
  EXPECT_NEAR(std::abs(r2(0, 1)), 0.5 * std::exp(-n / t2), 1e-12);
}

TEST(Density, TraceKeptAndUnitalNoiseNeverRaisesPurity) {
  const auto dev = noisy_qubit(1e12, 60.0);  // effectively pure dephasing
  auto noise = NoiseModel::from_device(dev);
  noise.gamma1[0] = 0.0;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix rho = basis_state(2, 0) * basis_state(2, 0).adjoint();
  double previous = purity(rho);
  for (int step = 0; step < 8; ++step) {
    const auto s = constant_drive({0.7 * u(rng), 0.7 * u(rng)}, 3);
    rho = propagate_density(dev, s, Frame::RWA, rho, noise);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
    const double p = purity(rho);
    EXPECT_LE(p, previous + 1e-12);
    previous = p;
  }
}

TEST(Density, ValidatesInputs) {
  const auto dev = preset_device("h2_1q");
  const auto s = constant_drive({0.1, 0.0}, 1);
  ComplexMatrix rho = ComplexMatrix::Identity(2, 2);
  EXPECT_THROW(propagate_density(dev, s, Frame::RWA, rho, NoiseModel::ideal(1)), InvalidDensity);
  rho = 0.5 * rho;
  EXPECT_THROW(propagate_density(dev, s, Frame::RWA, rho, NoiseModel::ideal(2)), DimMismatch);
  NoiseModel bad = NoiseModel::ideal(1);
  bad.confusion[0] << 0.9, 0.2, 0.2, 0.8;
  EXPECT_THROW(bad.validate(1), ValidationError);
}

TEST(Noise, RatesFromDevice) {
  const auto noise = NoiseModel::from_device(noisy_qubit(100.0, 80.0));
  EXPECT_DOUBLE_EQ(noise.gamma1[0], 1.0 / 100e-9);
  EXPECT_DOUBLE_EQ(noise.gamma_phi[0], 1.0 / 80e-9 - 0.5 / 100e-9);
  EXPECT_TRUE(noise.has_dissipation());
  EXPECT_FALSE(noise.has_readout_error());
  auto r = NoiseModel::ideal(2).with_readout(0.02, 0.05);
  EXPECT_TRUE(r.has_readout_error());
  EXPECT_DOUBLE_EQ(r.confusion[1](1, 0), 0.02);
  EXPECT_DOUBLE_EQ(r.confusion[1](0, 1), 0.05);
}

TEST(Leakage, MaxAmplitudeProbe) {
  const auto dev = preset_device("transmon_4l");
  const auto p5 = leakage_probe(4, {1.0, 0.0}, 5, dev);
  EXPECT_NEAR(p5[2], 0.02, 0.01);
  const auto trace = leakage_trace(4, {1.0, 0.0}, 6, dev);
  for (const auto& row : trace.populations) {
    EXPECT_LT(row[3], 0.005);
    EXPECT_NEAR(row[0] + row[1] + row[2] + row[3], 1.0, 1e-10);
  }
  // first substep where p1 reaches the target excited population
  const double target = 0.1135 * 0.1135;
  std::size_t i = 0;
  while (trace.populations[i][1] < target) ++i;
  EXPECT_NEAR(trace.time_s[i] / dev.dt(), 1.0, 0.15);
}

TEST(Leakage, StudyPulseBarelyLeaks) {
  const auto p = leakage_probe(4, {-0.07047161691763452, -0.26610396687855536}, 1, preset_device("transmon_4l"));
  EXPECT_LT(p[2] + p[3], 1e-5);
}

TEST(Leakage, ZeroAmplitudeStaysInGround) {
  const auto trace = leakage_trace(4, {0.0, 0.0}, 2, preset_device("transmon_4l"), 10);
  EXPECT_EQ(trace.populations.size(), 21u);
  for (const auto& row : trace.populations) EXPECT_NEAR(row[0], 1.0, 1e-14);
}

TEST(Leakage, RejectsBadArguments) {
  const auto dev = preset_device("transmon_4l");
  EXPECT_THROW(leakage_trace(2, {0.1, 0.0}, 1, dev), PreconditionError);
  EXPECT_THROW(leakage_trace(4, {1.0, 1.0}, 1, dev), PreconditionError);
}
