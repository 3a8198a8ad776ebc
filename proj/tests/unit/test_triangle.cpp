#include "reserving/triangle.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace reserving {
namespace {

using testing::fixture;
using testing::fixture_ratios;

const char* kHeader = "accident_year,premium,dev_1,dev_2,dev_3,dev_4,dev_5,dev_6,dev_7,dev_8,dev_9,dev_10\n";

TriangleErrorKind kind_of(const std::string& text) {
    try {
        parse_triangle(text);
    } catch (const TriangleError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error for:\n" << text;
    return TriangleErrorKind::Parse;
}

TEST(Triangle, LoadsFixture) {
    const auto t = fixture();
    EXPECT_EQ(t.m(), 18u);
    EXPECT_EQ(t.n(), 10u);
    EXPECT_EQ(t.accident_year(0), 1989);
    EXPECT_DOUBLE_EQ(t.premium(0), 165339.0);
    EXPECT_DOUBLE_EQ(t.row(0)[0], 41891.0);
    EXPECT_EQ(t.observed(17), 1u);
}

TEST(Triangle, SingleRowWithBlanks) {
    const auto t = parse_triangle(std::string(kHeader) + "2006,341973,66827,,,,,,,,,\n");
    EXPECT_EQ(t.m(), 1u);
    EXPECT_EQ(t.n(), 10u);
    EXPECT_EQ(t.observed(0), 1u);
    EXPECT_TRUE(t.is_observed(0, 1));
    EXPECT_FALSE(t.is_observed(0, 2));
}

TEST(Triangle, RejectsInvalidInput) {
    EXPECT_EQ(kind_of(std::string(kHeader) + "2006,0,66827,,,,,,,,,\n"), TriangleErrorKind::NonPositivePremium);
    EXPECT_EQ(kind_of(std::string(kHeader) + "2006,100,-5,,,,,,,,,\n"), TriangleErrorKind::NonPositiveLoss);
    EXPECT_EQ(kind_of(std::string(kHeader) + "2006,100,5,,7,,,,,,,\n"), TriangleErrorKind::NonStaircase);
    EXPECT_EQ(kind_of(std::string(kHeader) + "2006,100,,,,,,,,,,\n"), TriangleErrorKind::EmptyRow);
    EXPECT_EQ(kind_of(std::string(kHeader) + "2006,100,abc,,,,,,,,,\n"), TriangleErrorKind::Parse);
    EXPECT_THROW(load_triangle("/nonexistent/triangle.csv"), InputError);
}

TEST(Triangle, LossRatios) {
    const auto t = fixture();
    const auto y = to_loss_ratios(t);
    EXPECT_DOUBLE_EQ(y.row(8)[0], 38915.0 / 208179.0);
    EXPECT_NEAR(y.row(8)[0], 0.186931, 1e-6);

    const auto unit = to_loss_ratios(parse_triangle(std::string(kHeader) + "2000,250,250,,,,,,,,,\n"));
    EXPECT_DOUBLE_EQ(unit.row(0)[0], 1.0);
}

TEST(Triangle, Cumulatives) {
    const auto y = to_loss_ratios(fixture());
    EXPECT_NEAR(cumulative(y, 8, 1, 10), 0.629, 5e-4);
    EXPECT_NEAR(cumulative(y, 9, 1, 9), 0.70846, 5e-6);
    EXPECT_DOUBLE_EQ(cumulative(y, 3, 4, 4), y.row(3)[3]);
    EXPECT_DOUBLE_EQ(y.observed_cumulative(9), cumulative(y, 9, 1, 9));
    EXPECT_THROW(cumulative(y, 9, 1, 10), TriangleError);
    EXPECT_THROW(cumulative(y, 9, 3, 2), std::out_of_range);
}

TEST(Triangle, Restriction) {
    const auto t = fixture();
    const auto ten = restrict_years(t, 1997);
    EXPECT_EQ(ten.m(), 10u);
    EXPECT_EQ(ten.n(), 10u);
    EXPECT_EQ(format_triangle(most_recent(t, 10)), format_triangle(ten));
    EXPECT_EQ(format_triangle(restrict_years(t, 1989)), format_triangle(t));
    EXPECT_EQ(format_triangle(most_recent(t, 18)), format_triangle(t));

    std::size_t complete = 0;
    std::size_t history = 0;
    for (std::size_t i = 0; i < t.m(); ++i) {
        complete += t.is_complete(i);
        history += t.is_fully_developed_history(i);
    }
    EXPECT_EQ(complete, 9u);  // 1989..1997
    EXPECT_EQ(history, 8u);   // i <= m - n
    EXPECT_THROW(restrict_years(t, 2010), TriangleError);
}

TEST(Triangle, FormatRoundTrip) {
    const auto t = fixture();
    EXPECT_EQ(format_triangle(parse_triangle(format_triangle(t))), format_triangle(t));
}

TEST(Triangle, HoldoutRealizedRatios) {
    const auto training = parse_triangle(std::string("accident_year,premium,dev_1,dev_2,dev_3\n") +
                                         "2000,100,10,20,30\n2001,200,40,20,\n2002,50,5,,\n");
    const auto holdout = parse_holdout("accident_year,premium,dev_1,dev_2,dev_3\n2001,200,,,10\n2002,50,,5,5\n");
    const auto realized = realized_ultimate_ratios(training, holdout);
    ASSERT_EQ(realized.size(), 3u);
    EXPECT_DOUBLE_EQ(realized[0], 0.6);
    EXPECT_DOUBLE_EQ(realized[1], 0.35);
    EXPECT_DOUBLE_EQ(realized[2], 0.3);

    EXPECT_EQ(format_holdout(parse_holdout(format_holdout(holdout, 3)), 3), format_holdout(holdout, 3));

    const auto partial = parse_holdout("accident_year,premium,dev_1,dev_2,dev_3\n2001,200,,,10\n");
    EXPECT_THROW(realized_ultimate_ratios(training, partial), TriangleError);
}

}  // namespace
}  // namespace reserving
