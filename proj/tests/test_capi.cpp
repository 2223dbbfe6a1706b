#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "topomcts/topomcts.h"

namespace fs = std::filesystem;

namespace {

const int kCross[] = {1, 2, 1, 2, 3, 2, 1, 2, -1};
const int kCrossTruth[] = {1, 2, 1, 2, 3, 2, 1, 2, 1};

std::string take(char* s) {
    std::string out = s ? s : "";
    tm_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("status names and version") {
    CHECK(std::strcmp(tm_version(), "0.1.0") == 0);
    CHECK(std::strcmp(tm_status_name(TM_OK), "Ok") == 0);
    CHECK(std::strcmp(tm_status_name(TM_ERR_IO), "IOFailure") == 0);
    CHECK(std::strcmp(tm_status_name(TM_ERR_INVARIANT_VIOLATION), "InvariantViolation") == 0);
    CHECK(std::strcmp(tm_status_name(static_cast<tm_status>(55)), "Unknown") == 0);
}

TEST_CASE("task lifecycle") {
    tm_task* task = nullptr;
    REQUIRE(tm_task_create(3, 3, 4, kCross, kCrossTruth, &task) == TM_OK);
    int rows = 0, cols = 0, k = 0, missing = 0;
    REQUIRE(tm_task_shape(task, &rows, &cols, &k, &missing) == TM_OK);
    CHECK(rows == 3);
    CHECK(cols == 3);
    CHECK(k == 4);
    CHECK(missing == 1);

    char* rule = nullptr;
    REQUIRE(tm_detect_pattern(task, &rule) == TM_OK);
    CHECK(take(rule) == "rotational_symmetry_90");

    char* json = nullptr;
    REQUIRE(tm_task_to_json(task, &json) == TM_OK);
    tm_task* copy = nullptr;
    const std::string text = take(json);
    REQUIRE(tm_task_from_json(text.c_str(), &copy) == TM_OK);
    tm_task_shape(copy, nullptr, nullptr, nullptr, &missing);
    CHECK(missing == 1);
    tm_task_free(copy);
    tm_task_free(task);
}

TEST_CASE("errors map to status codes") {
    tm_task* task = nullptr;
    const int bad[] = {0, 9, 0, 0};
    CHECK(tm_task_create(2, 2, 3, bad, nullptr, &task) == TM_ERR_COLOR_OUT_OF_RANGE);
    CHECK(task == nullptr);
    CHECK(std::strlen(tm_last_error()) > 0);
    CHECK(tm_task_create(2, 2, 3, nullptr, nullptr, &task) == TM_ERR_INVALID_ARGUMENT);
    CHECK(tm_task_from_json("{", &task) == TM_ERR_MALFORMED_DOCUMENT);
    double v = 0;
    CHECK(tm_grid_lambda2(0, 3, &v) == TM_ERR_INVALID_ARGUMENT);
    int correct = 0, total = 0;
    tm_suite_config cfg;
    tm_suite_config_uniform(&cfg, 1);
    CHECK(tm_run_detection(&cfg, 0, "/proc/definitely/not/writable", &correct, &total) == TM_ERR_IO);
    CHECK(tm_make_tables("/nonexistent.csv", "/tmp") == TM_ERR_IO);
}

TEST_CASE("grid lambda2 and root features") {
    double v = 0;
    REQUIRE(tm_grid_lambda2(3, 3, &v) == TM_OK);
    CHECK(v == doctest::Approx(1.0));
    REQUIRE(tm_grid_lambda2(1, 4, &v) == TM_OK);
    CHECK(v == doctest::Approx(2.0 - 2.0 * std::cos(M_PI / 4.0)));

    tm_task* task = nullptr;
    REQUIRE(tm_task_create(3, 3, 4, kCross, kCrossTruth, &task) == TM_OK);
    tm_features f{};
    REQUIRE(tm_root_features(task, nullptr, &f) == TM_OK);
    CHECK(f.graph_nodes == 1);
    CHECK(f.graph_edges == 0);
    CHECK(f.lambda2 == 0.0);
    CHECK(tm_root_features(task, "no_such_rule", &f) == TM_ERR_INVALID_ARGUMENT);
    tm_task_free(task);
}

TEST_CASE("search through the C API") {
    tm_task* task = nullptr;
    REQUIRE(tm_task_create(3, 3, 4, kCross, kCrossTruth, &task) == TM_OK);
    tm_search_config cfg;
    tm_search_config_default(&cfg);
    CHECK(cfg.iterations == 100);
    CHECK(cfg.mode == TM_MODE_FULL);
    CHECK(cfg.c == doctest::Approx(1.414));
    tm_search_summary s{};
    REQUIRE(tm_search(task, nullptr, &cfg, &s) == TM_OK);
    CHECK(s.solved == 1);
    CHECK(s.reward == 1.0);
    CHECK(s.rollouts_to_solution == 1);
    cfg.mode = static_cast<tm_mode>(9);
    CHECK(tm_search(task, nullptr, &cfg, &s) == TM_ERR_INVALID_ARGUMENT);
    tm_task_free(task);

    const int open[] = {1, -1, -1, -1};
    REQUIRE(tm_task_create(2, 2, 3, open, nullptr, &task) == TM_OK);
    tm_search_config_default(&cfg);
    CHECK(tm_search(task, nullptr, &cfg, &s) == TM_ERR_INVALID_ARGUMENT);
    tm_task_free(task);
}

TEST_CASE("suites through the C API") {
    tm_suite_config cfg;
    tm_suite_config_default(&cfg);
    CHECK(cfg.counts[0] == 12);
    CHECK(cfg.counts[3] == 6);
    tm_suite* suite = nullptr;
    REQUIRE(tm_suite_build(&cfg, 0, &suite) == TM_OK);
    REQUIRE(tm_suite_size(suite) == 48);
    tm_task* task = nullptr;
    char* id = nullptr;
    char* rule = nullptr;
    REQUIRE(tm_suite_get(suite, 0, &task, &id, &rule) == TM_OK);
    CHECK(take(id) == "rotational_symmetry_00");
    CHECK(take(rule) == "rotational_symmetry_180");
    tm_task_free(task);
    CHECK(tm_suite_get(suite, 48, &task, nullptr, nullptr) == TM_ERR_INVALID_ARGUMENT);
    tm_suite_free(suite);
    CHECK(tm_suite_size(nullptr) == 0);
}

TEST_CASE("experiments through the C API") {
    const auto dir = fs::temp_directory_path() / "topomcts_capi";
    fs::remove_all(dir);
    tm_suite_config cfg;
    tm_suite_config_uniform(&cfg, 1);
    int correct = 0, total = 0;
    REQUIRE(tm_run_detection(&cfg, 0, (dir / "d").c_str(), &correct, &total) == TM_OK);
    CHECK(correct == 5);
    CHECK(total == 5);
    REQUIRE(tm_run_features(&cfg, 0, 1, (dir / "f").c_str()) == TM_OK);
    CHECK(fs::exists(dir / "f" / "features.csv"));
    const uint64_t seeds[] = {0};
    cfg.counts[1] = cfg.counts[2] = cfg.counts[3] = cfg.counts[4] = 0;
    REQUIRE(tm_run_ablation(&cfg, 0, seeds, 1, 20, 1, (dir / "a").c_str()) == TM_OK);
    REQUIRE(tm_make_tables((dir / "a" / "ablation.csv").c_str(), (dir / "t").c_str()) == TM_OK);
    CHECK(fs::exists(dir / "t" / "methods_table.txt"));
    CHECK(tm_run_ablation(&cfg, 0, seeds, 0, 20, 1, (dir / "a").c_str()) == TM_ERR_INVALID_ARGUMENT);
    int ran = 0, skipped = 0;
    CHECK(tm_run_arc((dir / "none").c_str(), 10, 1.0, 0, 1, (dir / "arc").c_str(), &ran, &skipped) == TM_ERR_IO);
    CHECK(tm_worker_count() >= 1);
    fs::remove_all(dir);
}
