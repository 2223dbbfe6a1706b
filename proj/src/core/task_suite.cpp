#include "topomcts/task_suite.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "topomcts/compat_graph.hpp"
#include "topomcts/error.hpp"
#include "topomcts/mcts.hpp"

namespace topomcts {

namespace {

constexpr int kMaxAttempts = 20000;

void shuffle(std::vector<int>& v, Rng& rng) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
        std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(rng.below(i + 1))]);
    }
}

std::vector<Color> symmetric_truth(const SyntheticSpec& spec, Transform t, Rng& rng) {
    const int n = spec.rows * spec.cols;
    std::vector<Color> grid(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        if (grid[i] >= 0) continue;
        const Color color = rng.below(spec.alphabet_size);
        int j = i;
        do {
            grid[j] = color;
            const Cell c = apply_transform(t, {j / spec.cols, j % spec.cols}, spec.rows, spec.cols);
            j = c.row * spec.cols + c.col;
        } while (grid[j] < 0);
    }
    return grid;
}

std::vector<Color> balanced_truth(const SyntheticSpec& spec, Rng& rng) {
    const int n = spec.rows * spec.cols;
    const int k = spec.alphabet_size;
    std::vector<int> palette(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) palette[c] = c;
    shuffle(palette, rng);
    std::vector<int> grid;
    grid.reserve(static_cast<std::size_t>(n));
    // Counts differ by at most one; the extra cells go to the first colours.
    for (int c = 0; c < k; ++c) {
        const int count = n / k + (c < n % k ? 1 : 0);
        grid.insert(grid.end(), static_cast<std::size_t>(count), palette[c]);
    }
    shuffle(grid, rng);
    return grid;
}

std::vector<std::pair<int, int>> progressions(int length, int k) {
    std::vector<std::pair<int, int>> out;
    for (int step = -(k - 1); step <= k - 1; ++step) {
        for (int start = 0; start < k; ++start) {
            const int last = start + step * (length - 1);
            if (last >= 0 && last < k) out.emplace_back(start, step);
        }
    }
    return out;
}

std::vector<Color> progression_truth(const SyntheticSpec& spec, Rng& rng) {
    bool by_rows = rng.below(2) == 0;
    if (by_rows && spec.cols < 3) by_rows = false;
    if (!by_rows && spec.rows < 3) by_rows = true;
    const int lines = by_rows ? spec.rows : spec.cols;
    const int length = by_rows ? spec.cols : spec.rows;
    const auto choices = progressions(length, spec.alphabet_size);
    std::vector<Color> grid(static_cast<std::size_t>(spec.rows * spec.cols));
    for (int line = 0; line < lines; ++line) {
        const auto [start, step] = choices[static_cast<std::size_t>(
            rng.below(static_cast<int>(choices.size())))];
        for (int t = 0; t < length; ++t) {
            const int idx = by_rows ? line * spec.cols + t : t * spec.cols + line;
            grid[idx] = start + step * t;
        }
    }
    return grid;
}

std::vector<Color> random_truth(const SyntheticSpec& spec, Rng& rng) {
    std::vector<Color> grid(static_cast<std::size_t>(spec.rows * spec.cols));
    for (auto& v : grid) v = rng.below(spec.alphabet_size);
    return grid;
}

bool truth_survives_pruning(const GridTask& masked, const PatternRule& rule) {
    auto dom = initial_domains(masked);
    propagate_domains(masked, rule, dom);
    for (int i = 0; i < masked.size(); ++i) {
        if (!masked.at(i) && (dom[i] & (ColorMask{1} << masked.truth_at(i))) == 0) return false;
    }
    return true;
}

void validate(const SyntheticSpec& spec) {
    if (spec.rows < 1 || spec.cols < 1 || spec.alphabet_size < 1 ||
        spec.alphabet_size > kMaxAlphabet) {
        throw Error(ErrorCode::InfeasibleSpec, "invalid grid shape or alphabet");
    }
    if (spec.num_missing < 1 || spec.num_missing >= spec.rows * spec.cols) {
        throw Error(ErrorCode::InfeasibleSpec, "num_missing must be in [1, rows*cols)");
    }
    const auto fam = family_of(spec.rule);
    if ((fam == PatternFamily::Rotational || fam == PatternFamily::Reflective) &&
        requires_square(transform_of(spec.rule)) && spec.rows != spec.cols) {
        throw Error(ErrorCode::InfeasibleSpec, "rule needs a square grid");
    }
    if (fam == PatternFamily::ArithmeticProgression && spec.rows < 3 && spec.cols < 3) {
        throw Error(ErrorCode::InfeasibleSpec, "progressions need a line of length 3");
    }
}

}  // namespace

GridTask generate_task(const SyntheticSpec& spec) {
    validate(spec);
    Rng rng(spec.generator_seed, Rng::hash(to_string(spec.rule)));
    const auto fam = family_of(spec.rule);
    const int n = spec.rows * spec.cols;
    const DetectionConfig cfg;

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::vector<Color> truth;
        switch (fam) {
            case PatternFamily::Rotational:
            case PatternFamily::Reflective:
                truth = symmetric_truth(spec, transform_of(spec.rule), rng);
                break;
            case PatternFamily::ColorFrequency: truth = balanced_truth(spec, rng); break;
            case PatternFamily::ArithmeticProgression: truth = progression_truth(spec, rng); break;
            case PatternFamily::Spatial: truth = random_truth(spec, rng); break;
        }

        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[i] = i;
        shuffle(order, rng);
        std::vector<std::optional<Color>> cells(truth.begin(), truth.end());
        for (int i = 0; i < spec.num_missing; ++i) cells[order[i]].reset();

        GridTask masked(spec.rows, spec.cols, spec.alphabet_size, std::move(cells), truth);
        const PatternRule detected = detect_pattern(masked, cfg);
        if (family_of(detected) != fam) continue;
        if (!truth_survives_pruning(masked, detected)) continue;
        return masked;
    }
    throw Error(ErrorCode::InfeasibleSpec,
                "no instance of " + to_string(spec.rule) + " found within the attempt budget");
}

SuiteConfig SuiteConfig::uniform(int per_type) {
    SuiteConfig cfg;
    cfg.counts.fill(per_type);
    return cfg;
}

int SuiteConfig::total() const {
    int sum = 0;
    for (int c : counts) sum += c;
    return sum;
}

std::vector<SuiteTask> build_suite(const SuiteConfig& config, std::uint64_t seed) {
    if (config.min_missing < 1 || config.max_missing < config.min_missing) {
        throw Error(ErrorCode::InvalidArgument, "invalid missing-cell range");
    }
    for (int c : config.counts) {
        if (c < 0) throw Error(ErrorCode::InvalidArgument, "negative task count");
    }
    static constexpr Axis kAxes[] = {Axis::Horizontal, Axis::Vertical, Axis::Diagonal,
                                     Axis::AntiDiagonal};
    Rng rng(seed, Rng::hash("suite"));
    std::vector<SuiteTask> suite;
    suite.reserve(static_cast<std::size_t>(config.total()));
    const int cells = config.rows * config.cols;
    for (std::size_t f = 0; f < std::size(kAllFamilies); ++f) {
        const PatternFamily fam = kAllFamilies[f];
        for (int idx = 0; idx < config.counts[f]; ++idx) {
            SyntheticSpec spec;
            switch (fam) {
                case PatternFamily::Rotational:
                    spec.rule = RotationalSymmetry{idx % 2 == 0 ? 180 : 90};
                    break;
                case PatternFamily::Reflective: spec.rule = ReflectiveSymmetry{kAxes[idx % 4]}; break;
                case PatternFamily::ColorFrequency: spec.rule = ColorFrequency{}; break;
                case PatternFamily::ArithmeticProgression: spec.rule = ArithmeticProgression{}; break;
                case PatternFamily::Spatial: spec.rule = SpatialPattern{}; break;
            }
            spec.rows = config.rows;
            spec.cols = config.cols;
            spec.alphabet_size = config.alphabet_size;
            const int span = config.max_missing - config.min_missing + 1;
            spec.num_missing = std::min(config.min_missing + rng.below(span), cells - 1);
            spec.generator_seed = rng.engine()();
            suite.push_back({fmt::format("{}_{:02}", to_string(fam), idx), spec.rule,
                             generate_task(spec)});
        }
    }
    return suite;
}

std::vector<SuiteTask> build_suite(int count_per_type, std::uint64_t seed) {
    if (count_per_type < 1) throw Error(ErrorCode::InvalidArgument, "count_per_type must be >= 1");
    return build_suite(SuiteConfig::uniform(count_per_type), seed);
}

namespace {

GridTask arc_grid(const nlohmann::json& node) {
    if (!node.is_array() || node.empty()) {
        throw Error(ErrorCode::MalformedDocument, "ARC grid must be a non-empty array");
    }
    std::vector<std::vector<int>> rows;
    for (const auto& r : node) {
        if (!r.is_array()) throw Error(ErrorCode::MalformedDocument, "ARC grid row is not an array");
        std::vector<int> row;
        for (const auto& v : r) {
            if (!v.is_number_integer()) {
                throw Error(ErrorCode::MalformedDocument, "ARC cell is not an integer");
            }
            const auto value = v.get<long long>();
            if (value < 0 || value >= kArcPalette) {
                throw Error(ErrorCode::ColorOutOfRange, "ARC colour outside [0, 10)");
            }
            row.push_back(static_cast<int>(value));
        }
        rows.push_back(std::move(row));
    }
    try {
        return GridTask::from_codes(kArcPalette, rows);
    } catch (const Error& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
    }
}

std::pair<GridTask, GridTask> arc_pair(const nlohmann::json& node) {
    if (!node.is_object() || !node.contains("input") || !node.contains("output")) {
        throw Error(ErrorCode::MalformedDocument, "ARC pair needs input and output");
    }
    return {arc_grid(node["input"]), arc_grid(node["output"])};
}

}  // namespace

ArcTask load_arc_task(const nlohmann::json& document) {
    if (!document.is_object() || !document.contains("train") || !document.contains("test")) {
        throw Error(ErrorCode::MalformedDocument, "ARC document needs train and test arrays");
    }
    const auto& train = document["train"];
    const auto& test = document["test"];
    if (!train.is_array() || train.empty() || !test.is_array() || test.empty()) {
        throw Error(ErrorCode::MalformedDocument, "train and test must be non-empty arrays");
    }
    std::vector<std::pair<GridTask, GridTask>> pairs;
    for (const auto& p : train) pairs.push_back(arc_pair(p));
    auto [input, output] = arc_pair(test.front());
    return ArcTask{std::move(pairs), std::move(input), std::move(output)};
}

ArcTask load_arc_task_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IOFailure, "cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, path.string() + ": " + e.what());
    }
    return load_arc_task(doc);
}

GameTask arc_to_game(const ArcTask& arc) {
    const GridTask& input = arc.test_input;
    const GridTask& truth = arc.truth_output;
    if (input.rows() != truth.rows() || input.cols() != truth.cols()) {
        throw Error(ErrorCode::ShapeChangeUnsupported, "test output shape differs from input");
    }
    std::vector<std::optional<Color>> cells;
    std::vector<Color> expected;
    for (int i = 0; i < truth.size(); ++i) {
        const Color t = *truth.at(i);
        expected.push_back(t);
        if (*input.at(i) == t) {
            cells.emplace_back(t);
        } else {
            cells.emplace_back(std::nullopt);
        }
    }
    GridTask game(truth.rows(), truth.cols(), truth.alphabet_size(), std::move(cells),
                  std::move(expected));

    std::map<PatternFamily, int> votes;
    std::vector<PatternRule> seen;
    for (const auto& [in, out] : arc.train_pairs) {
        const PatternRule r = detect_pattern(out);
        ++votes[family_of(r)];
        seen.push_back(r);
    }
    int best = 0;
    int leaders = 0;
    PatternFamily winner = PatternFamily::Spatial;
    for (const auto& [fam, count] : votes) {
        if (count > best) {
            best = count;
            leaders = 1;
            winner = fam;
        } else if (count == best) {
            ++leaders;
        }
    }
    PatternRule rule = SpatialPattern{};
    if (leaders == 1) {
        // Most frequent concrete rule of the winning family; first seen on ties.
        std::map<std::string, int> freq;
        int top = 0;
        for (const auto& r : seen) {
            if (family_of(r) != winner) continue;
            const int c = ++freq[to_string(r)];
            if (c > top) {
                top = c;
                rule = r;
            }
        }
    }
    const auto fam = family_of(rule);
    if ((fam == PatternFamily::Rotational || fam == PatternFamily::Reflective) &&
        requires_square(transform_of(rule)) && game.rows() != game.cols()) {
        rule = SpatialPattern{};
    }
    return GameTask{std::move(game), rule};
}

void write_suite(const std::vector<SuiteTask>& suite, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IOFailure, "cannot create " + dir.string());
    nlohmann::json index = nlohmann::json::array();
    for (const auto& t : suite) {
        nlohmann::json doc = task_to_json(t.task);
        doc["id"] = t.id;
        doc["rule"] = to_string(t.rule);
        std::ofstream out(dir / (t.id + ".json"));
        if (!(out << doc.dump(1) << '\n')) {
            throw Error(ErrorCode::IOFailure, "cannot write task " + t.id);
        }
        index.push_back({{"id", t.id}, {"rule", to_string(t.rule)}});
    }
    std::ofstream out(dir / "index.json");
    if (!(out << index.dump(1) << '\n')) throw Error(ErrorCode::IOFailure, "cannot write index");
}

}  // namespace topomcts
