#include <gtest/gtest.h>

#include <random>

#include "freepulse/pulse.hpp"

using namespace freepulse;

namespace {

std::vector<double> random_params(int n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Schedule, ValidatesDurationsAndAmplitudes) {
  const auto d0 = ChannelId::drive(0);
  const auto d1 = ChannelId::drive(1);
  EXPECT_THROW(PulseSchedule({{d0, {{2, {1.1, 0.0}}}}}), ValidationError);
  EXPECT_THROW(PulseSchedule({{d0, {{-1, {}}}}}), ValidationError);
  EXPECT_THROW(PulseSchedule({{d0, {{2, {}}}}, {d1, {{3, {}}}}}), ValidationError);
  const PulseSchedule s({{d0, {{2, {0.5, 0.0}}, {1, {0.0, -0.5}}}}});
  EXPECT_EQ(s.total_dt(), 3);
  EXPECT_EQ(s.amplitude(d0, 2), cplx(0.0, -0.5));
  EXPECT_EQ(s.amplitude(d1, 0), cplx(0.0, 0.0));
  EXPECT_EQ(s.samples(d0).size(), 3u);
}

TEST(Template, CountsForStandardLayouts) {
  const auto chain = preset_device("jakarta_3q");
  const auto uni = uniform_template(chain, 10, 100, true);
  EXPECT_EQ(uni.parameter_count(), 140);
  EXPECT_EQ(uni.total_dt(), 1000);
  EXPECT_EQ(drives_only_template(chain, 10, 100).parameter_count(), 60);
  const auto compact = lih_compact_template(chain);
  EXPECT_EQ(compact.parameter_count(), 16);
  EXPECT_EQ(compact.total_dt(), 416);
  EXPECT_EQ(uniform_template(preset_device("h2_1q"), 1, 1, true).parameter_count(), 2);
  EXPECT_THROW(uniform_template(chain, 0, 1, true), PreconditionError);
  EXPECT_THROW(lih_compact_template(preset_device("h2_1q")), TopologyMismatch);
}

TEST(Template, ParamsRoundTripInsideUnitDisk) {
  std::mt19937_64 rng(21);
  const auto tpl = lih_compact_template(preset_device("chain_3q"));
  for (int trial = 0; trial < 50; ++trial) {
    const auto theta = random_params(tpl.parameter_count(), rng, 0.7);
    const auto s = from_params(tpl, theta);
    EXPECT_FALSE(s.clamped());
    const auto back = to_params(tpl, s);
    ASSERT_EQ(back.size(), theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) EXPECT_DOUBLE_EQ(back[i], theta[i]);
  }
}

TEST(Template, ChannelMajorPacking) {
  const auto tpl = uniform_template(preset_device("chain_3q"), 2, 3, false);
  std::vector<double> theta(static_cast<std::size_t>(tpl.parameter_count()), 0.0);
  // channel 1 (d1), bin 1, imaginary part
  theta[2 * 2 + 2 + 1] = 0.25;
  const auto s = from_params(tpl, theta);
  EXPECT_EQ(s.amplitude(ChannelId::drive(1), 3), cplx(0.0, 0.25));
  EXPECT_EQ(s.amplitude(ChannelId::drive(1), 2), cplx(0.0, 0.0));
}

TEST(Template, ClampsRadiallyAndFlags) {
  const auto tpl = uniform_template(preset_device("h2_1q"), 1, 1, true);
  const auto s = from_params(tpl, {3.0, 4.0});
  EXPECT_TRUE(s.clamped());
  const cplx a = s.amplitude(ChannelId::drive(0), 0);
  EXPECT_NEAR(a.real(), 0.6, 1e-15);
  EXPECT_NEAR(a.imag(), 0.8, 1e-15);
  EXPECT_THROW(from_params(tpl, {0.1}), LengthMismatch);
  EXPECT_THROW(from_params(tpl, {std::nan(""), 0.0}), NonFiniteObjective);
}

TEST(Pad, ModesPlaceIdleTime) {
  const auto d0 = ChannelId::drive(0);
  const PulseSchedule s({{d0, {{2, {0.5, 0.0}}}}});
  const auto right = pad(s, 5, PadMode::Right);
  const auto left = pad(s, 5, PadMode::Left);
  const auto middle = pad(s, 5, PadMode::Middle);
  EXPECT_EQ(right.total_dt(), 5);
  EXPECT_EQ(right.amplitude(d0, 0), cplx(0.5, 0.0));
  EXPECT_EQ(left.amplitude(d0, 3), cplx(0.5, 0.0));
  EXPECT_EQ(left.amplitude(d0, 0), cplx(0.0, 0.0));
  EXPECT_EQ(middle.amplitude(d0, 1), cplx(0.5, 0.0));
  EXPECT_EQ(middle.amplitude(d0, 0), cplx(0.0, 0.0));
  EXPECT_EQ(pad(s, 2), s);
  EXPECT_THROW(pad(s, 1), TargetTooSmall);
  EXPECT_THROW(parse_pad_mode("center"), UnknownName);
}

TEST(Pad, PaddedTemplateMatchesPaddedSchedule) {
  std::mt19937_64 rng(4);
  const auto dev = preset_device("chain_3q");
  const auto tpl = uniform_template(dev, 3, 2, true);
  for (auto mode : {PadMode::Right, PadMode::Middle, PadMode::Left}) {
    const auto padded = padded_template(tpl, 11, mode);
    EXPECT_EQ(padded.parameter_count(), tpl.parameter_count());
    const auto theta = random_params(tpl.parameter_count(), rng, 0.5);
    EXPECT_EQ(from_params(padded, theta), pad(from_params(tpl, theta), 11, mode));
  }
}

TEST(Json, RoundTrip) {
  std::mt19937_64 rng(8);
  const auto tpl = uniform_template(preset_device("chain_3q"), 2, 5, true);
  const auto s = from_params(tpl, random_params(tpl.parameter_count(), rng, 0.6));
  const auto back = schedule_from_json(nlohmann::json::parse(schedule_to_json(s).dump()));
  EXPECT_EQ(back, s);
  EXPECT_THROW(schedule_from_json(nlohmann::json{{"channels", 3}}), ValidationError);
}
