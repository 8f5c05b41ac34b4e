#include <gtest/gtest.h>

#include <cstdio>

#include "mimodpd/checkpoint.hpp"
#include "mimodpd/dpd.hpp"
#include "mimodpd/rng.hpp"

using namespace mimodpd;

namespace {

void scramble(DpdModel& m, std::uint64_t seed) {
  Rng rng(seed);
  for (auto* p : parameters(m))
    for (double& v : p->values) v = rng.normal();
}

std::vector<std::vector<double>> values(DpdModel& m) {
  std::vector<std::vector<double>> out;
  for (auto* p : parameters(m)) out.push_back(p->values);
  return out;
}

}  // namespace

TEST(Checkpoint, FrequencyDomainModelsRoundTripExactly) {
  Rng rng(1);
  std::vector<DpdModel> models{make_fd_gmp(2, {5, 2, 1}, 0.7), make_fd_nn(2, 3, 7, 2, rng),
                               make_fd_cnn(1, 16, 4, 3, 2, rng)};
  for (auto& m : models) {
    scramble(m, 3);
    DpdModel back = deserialize_dpd(serialize_dpd(m));
    EXPECT_EQ(scheme_of(back), scheme_of(m));
    EXPECT_EQ(values(back), values(m));
    EXPECT_EQ(serialize_dpd(back), serialize_dpd(m));
  }
  auto& g = std::get<FdGmpDpd>(models[0]);
  auto back = std::get<FdGmpDpd>(deserialize_dpd(serialize_dpd(models[0])));
  EXPECT_EQ(back.input_scale, g.input_scale);
  EXPECT_EQ(back.structure, g.structure);
}

TEST(Checkpoint, TimeDomainGmpRoundTrip) {
  Rng rng(2);
  TdGmpDpd d;
  d.rate_factor = 4;
  for (int b = 0; b < 3; ++b) {
    GmpStructure s{3, 2, 1};
    std::vector<cplx> th(s.coeff_count());
    for (auto& v : th) v = rng.cnormal();
    d.branches.push_back(GmpModel::unflatten(s, th, 1.5 + b));
  }
  DpdModel m = d;
  auto back = std::get<TdGmpDpd>(deserialize_dpd(serialize_dpd(m)));
  ASSERT_EQ(back.branches.size(), 3u);
  EXPECT_EQ(back.rate_factor, 4);
  for (int b = 0; b < 3; ++b) {
    EXPECT_EQ(back.branches[b].flatten(), d.branches[b].flatten());
    EXPECT_EQ(back.branches[b].sat_level, d.branches[b].sat_level);
  }
}

TEST(Checkpoint, FileRoundTripAndErrors) {
  DpdModel m = make_fd_gmp(1, {3, 1, 0}, 1.0);
  scramble(m, 4);
  const std::string path = ::testing::TempDir() + "ckpt.json";
  save_checkpoint(path, m);
  DpdModel back = load_checkpoint(path);
  EXPECT_EQ(values(back), values(m));
  std::remove(path.c_str());
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  EXPECT_THROW(deserialize_dpd("{}"), Error);
  EXPECT_THROW(deserialize_dpd("not json"), Error);
  // tampered shape
  std::string text = serialize_dpd(m);
  const auto pos = text.find("\"shape\"");
  ASSERT_NE(pos, std::string::npos);
  std::string bad = text;
  bad.replace(text.find('1', pos), 1, "2");
  EXPECT_THROW(deserialize_dpd(bad), Error);
}

TEST(Checkpoint, GmpJson) {
  GmpModel g = GmpModel::identity({4, 1, 2});
  g.c_at(2, 1, 2) = cplx(0.25, -0.5);
  g.sat_level = 3.0;
  GmpModel back = deserialize_gmp(serialize_gmp(g));
  EXPECT_EQ(back.flatten(), g.flatten());
  EXPECT_EQ(back.sat_level, 3.0);
}
