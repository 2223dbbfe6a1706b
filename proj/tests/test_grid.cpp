#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "topomcts/error.hpp"
#include "topomcts/grid.hpp"

using namespace topomcts;

namespace {

// Path spectrum 2 - 2cos(pi k / n); the grid is the Cartesian product.
double product_lambda2(int rows, int cols) {
    std::vector<double> values;
    for (int a = 0; a < rows; ++a) {
        for (int b = 0; b < cols; ++b) {
            values.push_back(2 - 2 * std::cos(M_PI * a / rows) + 2 - 2 * std::cos(M_PI * b / cols));
        }
    }
    std::sort(values.begin(), values.end());
    return values.size() < 2 ? 0.0 : values[1];
}

GridTask cross() { return GridTask::from_codes(3, {{1, 0, 1}, {0, -1, 0}, {1, 0, 1}}); }

}  // namespace

TEST_CASE("construction validates shape and colours") {
    CHECK_THROWS_AS(GridTask(0, 3, 3, {}), Error);
    try {
        GridTask::from_codes(3, {{0, 3}});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ColorOutOfRange);
    }
    try {
        GridTask::from_codes(3, {{0, 1}, {2}});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ShapeMismatch);
    }
    try {
        GridTask::from_codes(3, {{0, -1}}, std::vector<std::vector<int>>{{1, 2}});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("missing cells are listed row-major") {
    const auto t = GridTask::from_codes(4, {{-1, 1, -1}, {2, -1, 3}});
    CHECK(t.missing_count() == 3);
    const std::vector<Cell> expect{{0, 0}, {0, 2}, {1, 1}};
    CHECK(t.missing_cells() == expect);
    CHECK(t.codes() == std::vector<int>{-1, 1, -1, 2, -1, 3});
}

TEST_CASE("apply_assignment fills the centre of the cross") {
    const auto t = cross();
    const auto filled = apply_assignment(t, {{1, 1}, 2});
    CHECK(filled.missing_count() == 0);
    CHECK(filled.at(Cell{1, 1}) == 2);
    CHECK(t.missing_count() == 1);  // original untouched
}

TEST_CASE("apply_assignment errors") {
    const auto t = cross();
    auto code_of = [&](Assignment a) {
        try {
            apply_assignment(t, a);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvariantViolation;
    };
    CHECK(code_of({{0, 0}, 1}) == ErrorCode::CellAlreadyFilled);
    CHECK(code_of({{1, 1}, 3}) == ErrorCode::ColorOutOfRange);
    CHECK(code_of({{3, 0}, 1}) == ErrorCode::InvalidArgument);
}

TEST_CASE("grid lambda2 matches the Cartesian product spectrum") {
    CHECK(grid_laplacian_lambda2(1, 1) == 0.0);
    CHECK(grid_laplacian_lambda2(3, 3) == doctest::Approx(1.0).epsilon(1e-12));
    for (int r = 1; r <= 6; ++r) {
        for (int c = 1; c <= 6; ++c) {
            CHECK(grid_laplacian_lambda2(r, c) == doctest::Approx(product_lambda2(r, c)).epsilon(1e-10));
        }
    }
}

TEST_CASE("grid lambda2 depends only on shape") {
    const auto a = cross();
    const auto b = GridTask::from_codes(3, {{-1, -1, 2}, {0, 0, 0}, {1, -1, -1}});
    CHECK(grid_laplacian_lambda2(a) == grid_laplacian_lambda2(b));
    CHECK(grid_laplacian_lambda2(a) == grid_laplacian_lambda2(3, 3));
}

TEST_CASE("json round trip keeps cells and truth") {
    const auto t = GridTask::from_codes(5, {{0, -1}, {4, 2}}, std::vector<std::vector<int>>{{0, 3}, {4, 2}});
    const auto back = task_from_json_string(task_to_json_string(t));
    CHECK(back == t);
    CHECK(back.has_ground_truth());
    CHECK(back.truth_at(1) == 3);
}

TEST_CASE("malformed json is rejected") {
    for (const char* doc : {"{", "{\"rows\":1}", "[1,2]", "{\"rows\":1,\"cols\":1,\"K\":2,\"cells\":[[\"a\"]]}"}) {
        try {
            task_from_json_string(doc);
            FAIL("expected throw for " << doc);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MalformedDocument);
        }
    }
}
