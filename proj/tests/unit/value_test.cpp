#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "crowdms/value.hpp"
#include "support.hpp"

using namespace crowdms;

TEST(Canonicalize, SortsObjectKeys) {
  EXPECT_EQ(canonicalize(parse_value(R"({"b":1, "a":2})")), R"({"a":2,"b":1})");
}

TEST(Canonicalize, ShortestRoundTripNumbers) {
  EXPECT_EQ(canonicalize(parse_value("2.50")), "2.5");
  EXPECT_EQ(canonicalize(Value(0.1)), "0.1");
  EXPECT_EQ(canonicalize(Value(1.0)), "1");
  EXPECT_EQ(canonicalize(Value(-0.0)), "0");
  EXPECT_EQ(canonicalize(Value(1e300)), "1e+300");
}

TEST(Canonicalize, PreservesListOrder) {
  EXPECT_EQ(canonicalize(parse_value(R"([{"y":true},{"x":null}])")), R"([{"y":true},{"x":null}])");
}

TEST(Canonicalize, NoWhitespaceAndEscapes) {
  Value v{{"k", "line\nbreak \"q\""}, {"list", {1, 2, 3}}};
  EXPECT_EQ(canonicalize(v), R"({"k":"line\nbreak \"q\"","list":[1,2,3]})");
}

TEST(Canonicalize, RejectsNonFinite) {
  EXPECT_THROW(canonicalize(Value(std::numeric_limits<double>::quiet_NaN())), CanonicalFormError);
  EXPECT_THROW(canonicalize(Value{{"x", {std::numeric_limits<double>::infinity()}}}), CanonicalFormError);
}

TEST(Canonicalize, IntegerAndDoubleAgree) {
  EXPECT_TRUE(canonical_equal(Value(3), Value(3.0)));
  EXPECT_FALSE(canonical_equal(Value(3), Value("3")));
}

TEST(ParseValue, RejectsMalformedText) { EXPECT_THROW(parse_value("{\"a\":"), CanonicalFormError); }

TEST(Minutes, ConvertsToSeconds) {
  EXPECT_EQ(minutes(15), 900);
  EXPECT_EQ(minutes(14), 840);
}

TEST(CanonicalizeProperty, IdempotentOverGeneratedValues) {
  support::ValueGen gen(20240601);
  for (int i = 0; i < 2000; ++i) {
    const Value v = gen.value();
    const std::string once = canonicalize(v);
    EXPECT_EQ(canonicalize(parse_value(once)), once) << once;
  }
}

TEST(CanonicalizeProperty, EqualValuesHaveEqualForms) {
  support::ValueGen gen(7);
  for (int i = 0; i < 500; ++i) {
    const Value v = gen.value();
    const Value copy = parse_value(v.dump(2));
    EXPECT_EQ(canonicalize(v), canonicalize(copy));
  }
}
