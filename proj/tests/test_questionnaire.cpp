#include <catch2/catch_amalgamated.hpp>

#include "cascreen/questionnaire.hpp"
#include "cascreen/rng.hpp"

using namespace cascreen;

namespace {

ParticipantRecord zero_record() {
  ParticipantRecord r;
  r.id = "p1";
  return r;
}

ParticipantRecord random_valid_record(Rng& rng) {
  ParticipantRecord r;
  r.id = "r";
  for (auto& v : r.ace_items) v = int(rng.uniform_u64(2));
  for (auto& v : r.who5_items) v = int(rng.uniform_u64(6));
  for (auto& v : r.mdi_items) v = int(rng.uniform_u64(6));
  for (auto& v : r.gad7_items) v = int(rng.uniform_u64(4));
  for (auto& v : r.isi_items) v = int(rng.uniform_u64(5));
  for (auto& v : r.behavioral) v = int(rng.uniform_u64(2));
  r.label = int(rng.uniform_u64(2));
  return r;
}

}  // namespace

TEST_CASE("instrument table matches the published scales") {
  CHECK(instrument(InstrumentId::ace16).item_count == 16);
  CHECK(instrument(InstrumentId::ace16).item_max == 1);
  CHECK(instrument(InstrumentId::who5).score_max() == 100);
  CHECK(instrument(InstrumentId::mdi).score_max() == 60);
  CHECK(instrument(InstrumentId::gad7).score_max() == 21);
  CHECK(instrument(InstrumentId::isi).score_max() == 28);
}

TEST_CASE("validate_record accepts in-range items") {
  CHECK(validate_record(zero_record()).empty());
}

TEST_CASE("validate_record flags out-of-range items with field and range") {
  auto r = zero_record();
  r.who5_items[2] = 6;
  auto v = validate_record(r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "who5[2]");
  CHECK(v[0].value == "6");
  CHECK(v[0].allowed == "0..5");

  r = zero_record();
  r.gad7_items[0] = 4;
  v = validate_record(r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "gad7[0]");
  CHECK(v[0].allowed == "0..3");
}

TEST_CASE("score_instrument sums and applies the WHO-5 factor") {
  CHECK(score_instrument(instrument(InstrumentId::ace16), std::vector<int>(16, 1)) == 16);
  CHECK(score_instrument(instrument(InstrumentId::who5), std::vector<int>(5, 5)) == 100);
  CHECK(score_instrument(instrument(InstrumentId::mdi), std::vector<int>(12, 0)) == 0);
}

TEST_CASE("score_instrument rejects bad input naming the instrument") {
  CHECK_THROWS_WITH(score_instrument(instrument(InstrumentId::who5), {1, 2, 3}),
                    Catch::Matchers::ContainsSubstring("who5"));
  CHECK_THROWS_WITH(score_instrument(instrument(InstrumentId::gad7), {0, 0, 0, 0, 0, 0, 9}),
                    Catch::Matchers::ContainsSubstring("gad7"));
}

TEST_CASE("score_instrument is permutation invariant") {
  Rng rng(11);
  std::vector<int> answers = {0, 1, 2, 3, 4, 5, 1};
  const int base = score_instrument(instrument(InstrumentId::mdi),
                                    {0, 1, 2, 3, 4, 5, 1, 0, 2, 4, 5, 3});
  std::vector<int> shuffled = {0, 1, 2, 3, 4, 5, 1, 0, 2, 4, 5, 3};
  for (int trial = 0; trial < 20; ++trial) {
    rng.shuffle(shuffled);
    CHECK(score_instrument(instrument(InstrumentId::mdi), shuffled) == base);
  }
}

TEST_CASE("encode_record fixes the 17-feature order") {
  SECTION("all zero") {
    const auto fv = encode_record(zero_record());
    for (double v : fv.values) CHECK(v == 0.0);
    CHECK(fv.label == 0);
  }
  SECTION("all maximum") {
    ParticipantRecord r = zero_record();
    for (auto& v : r.ace_items) v = 1;
    for (auto& v : r.who5_items) v = 5;
    for (auto& v : r.mdi_items) v = 5;
    for (auto& v : r.gad7_items) v = 3;
    for (auto& v : r.isi_items) v = 4;
    for (auto& v : r.behavioral) v = 1;
    r.label = 1;
    const auto fv = encode_record(r);
    const std::array<double, 17> expected = {1, 1, 1, 1, 1, 1, 16, 100, 21, 60, 28,
                                             1, 1, 1, 1, 1, 1};
    CHECK(fv.values == expected);
    CHECK(fv.label == 1);
  }
  SECTION("single canonical ACE item") {
    ParticipantRecord r = zero_record();
    r.ace_items[0] = 1;  // emotional_abuse
    const auto fv = encode_record(r);
    CHECK(fv.values[0] == 1.0);
    CHECK(fv.values[6] == 1.0);
    for (std::size_t i = 1; i < 6; ++i) CHECK(fv.values[i] == 0.0);
    for (std::size_t i = 7; i < 17; ++i) CHECK(fv.values[i] == 0.0);
  }
}

TEST_CASE("encode_record carries the violation list in its error") {
  auto r = zero_record();
  r.isi_items[3] = 9;
  CHECK_THROWS_WITH(encode_record(r), Catch::Matchers::ContainsSubstring("isi[3]=9"));
}

TEST_CASE("encode_record output is always in range; ACE flips move only ace_cumulative") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    auto r = random_valid_record(rng);
    auto fv = encode_record(r);
    CHECK(fv.values.size() == feature_count);
    for (std::size_t i = 0; i < 6; ++i) CHECK((fv.values[i] == 0.0 || fv.values[i] == 1.0));
    CHECK(fv.values[6] >= 0.0);
    CHECK(fv.values[6] <= 16.0);
    CHECK(fv.values[7] <= 100.0);
    CHECK(fv.values[8] <= 21.0);
    CHECK(fv.values[9] <= 60.0);
    CHECK(fv.values[10] <= 28.0);

    const std::size_t item = rng.uniform_u64(16);
    if (r.ace_items[item] == 0) {
      auto flipped = r;
      flipped.ace_items[item] = 1;
      const auto fv2 = encode_record(flipped);
      CHECK(fv2.values[6] == fv.values[6] + 1.0);
      CHECK(fv2.values[7] == fv.values[7]);
      CHECK(fv2.values[8] == fv.values[8]);
      CHECK(fv2.values[9] == fv.values[9]);
      CHECK(fv2.values[10] == fv.values[10]);
    }
  }
}

TEST_CASE("canonical feature names are exposed in fixed order") {
  CHECK(feature_names[0] == std::string("emotional_abuse"));
  CHECK(feature_names[6] == std::string("ace_cumulative"));
  CHECK(feature_names[16] == std::string("violent_family"));
  CHECK(feature_index("mdi_total") == 9);
  CHECK(feature_index("nope") == -1);
}
