#include <gtest/gtest.h>

#include "freepulse/device.hpp"

using namespace freepulse;

namespace {

constexpr const char* kTwoQubit = R"(# two transmons
dt_ns = 2/9
[qubit.0]
freq_z = 4.95
coupling_rate = 0.12
t1 = 100000
t2 = 80000
[qubit.1]
freq_z = 5.05
drive_freq = 5.06
coupling_rate = 0.12
[edge.0.1]
j = 0.0025
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST(Rational, ParsesFractionsAndDecimals) {
  const auto r = Rational::parse("2/9");
  EXPECT_EQ(r.num, 2);
  EXPECT_EQ(r.den, 9);
  EXPECT_DOUBLE_EQ(r.value(), 2.0 / 9.0);
  EXPECT_EQ(Rational::parse("0.5").str(), "1/2");
  EXPECT_EQ(Rational::parse("4/18").str(), "2/9");
  EXPECT_EQ(Rational::parse("3").str(), "3");
  EXPECT_THROW(Rational::parse("1/0"), ValidationError);
  EXPECT_THROW(Rational::parse("abc"), ValidationError);
}

TEST(ChannelId, LabelRoundTrip) {
  for (const auto& ch : {ChannelId::drive(2), ChannelId::control(0, 1), ChannelId::control(2, 1)}) {
    EXPECT_EQ(ChannelId::parse(ch.label()), ch);
  }
  EXPECT_EQ(ChannelId::drive(0).label(), "d0");
  EXPECT_EQ(ChannelId::control(1, 0).label(), "u1_0");
  EXPECT_THROW(ChannelId::parse("x3"), Error);
}

TEST(DeviceFile, ParsesUnitsAndDefaults) {
  const auto dev = parse_device(kTwoQubit, "two.dev");
  ASSERT_EQ(dev.n_qubits(), 2);
  EXPECT_DOUBLE_EQ(dev.dt(), 2.0 / 9.0 * 1e-9);
  EXPECT_DOUBLE_EQ(dev.qubits[0].freq_z, 4.95e9);
  EXPECT_DOUBLE_EQ(dev.qubits[0].drive_freq, 4.95e9);
  EXPECT_DOUBLE_EQ(dev.qubits[1].drive_freq, 5.06e9);
  EXPECT_DOUBLE_EQ(dev.qubits[0].t1, 100e-6);
  EXPECT_TRUE(std::isinf(dev.qubits[1].t1));
  EXPECT_EQ(dev.qubits[1].levels, 2);
  EXPECT_DOUBLE_EQ(dev.coupling(1, 0), 2.5e6);
  EXPECT_TRUE(dev.is_linear_chain());
}

TEST(DeviceFile, RejectsInvalidInput) {
  const std::string base = kTwoQubit;
  EXPECT_THROW(parse_device(replace(base, "freq_z = 4.95\n", ""), "x"), ValidationError);
  EXPECT_THROW(parse_device(replace(base, "coupling_rate = 0.12\nt1", "t1"), "x"), ValidationError);
  EXPECT_THROW(parse_device(replace(base, "j = 0.0025", "k = 1"), "x"), ParseError);
  EXPECT_THROW(parse_device(replace(base, "t2 = 80000", "t2 = 300000"), "x"), ValidationError);
  EXPECT_THROW(parse_device(replace(base, "[qubit.1]", "[qubit.2]"), "x"), ValidationError);
  EXPECT_THROW(parse_device(replace(base, "coupling_rate = 0.12\nt1", "coupling_rate = -1\nt1"), "x"),
               ValidationError);
  EXPECT_THROW(parse_device(base + "[edge.1.0]\nj = 0.003\n", "x"), ValidationError);
  EXPECT_THROW(parse_device(replace(base, "[edge.0.1]", "[wire.0.1]"), "x"), ParseError);
  EXPECT_THROW(parse_device(replace(base, "dt_ns = 2/9", "dt = 2/9"), "x"), ValidationError);
}

TEST(DeviceFile, ParseErrorCarriesLine) {
  try {
    parse_device(replace(kTwoQubit, "j = 0.0025", "k = 1"), "two.dev");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 13u);
  }
}

TEST(DeviceFile, MissingFileAndUnknownPreset) {
  EXPECT_THROW(load_device("/nonexistent/device.dev"), Error);
  EXPECT_THROW(load_device("preset:nope"), UnknownName);
}

TEST(Presets, AllLoadAndValidate) {
  for (const auto& name : device_preset_names()) {
    const auto dev = preset_device(name);
    EXPECT_NO_THROW(dev.validate()) << name;
  }
  const auto h2 = preset_device("h2_1q");
  EXPECT_EQ(h2.dt_ns.str(), "2/9");
  EXPECT_DOUBLE_EQ(h2.qubits[0].freq_z, 5.3615e9);
  EXPECT_DOUBLE_EQ(h2.qubits[0].coupling_rate, 0.2713740963766729e9);
  EXPECT_EQ(preset_device("transmon_4l").qubits[0].levels, 4);
  EXPECT_TRUE(preset_device("jakarta_3q").is_linear_chain());
}

TEST(Channels, OrderAndCounts) {
  const auto chain = preset_device("chain_3q");
  const auto ch = enumerate_channels(chain, true);
  std::vector<std::string> labels;
  for (const auto& c : ch) labels.push_back(c.label());
  EXPECT_EQ(labels, (std::vector<std::string>{"d0", "d1", "d2", "u0_1", "u1_0", "u1_2", "u2_1"}));
  EXPECT_EQ(enumerate_channels(chain, false).size(), 5u);
  EXPECT_EQ(parameter_count(chain, 10, true), 140);
  EXPECT_THROW(parameter_count(chain, 0, true), PreconditionError);
}

TEST(Channels, FullyBidirectionalPairMatchesSquareLaw) {
  // q qubits on a complete graph give q^2 channels, hence 2*N*q^2 parameters.
  const auto dev = parse_device(kTwoQubit, "two.dev");
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(parameter_count(dev, n, true), 2 * n * 4);
  EXPECT_EQ(parameter_count(dev, 5, true), 40);
}
