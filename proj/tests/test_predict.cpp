#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "rca/predict.hpp"
#include "rca/split.hpp"

using namespace rca;

namespace {

TemplateLibrary lib() { return TemplateLibrary::load_dir(RCA_ASSET_DIR); }

std::vector<MockScriptEntry> uniform_entries(std::size_t n, const std::string& response) {
    std::vector<MockScriptEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
        MockScriptEntry e;
        e.role = "predict";
        e.ordinal = static_cast<long>(i);
        e.response = response;
        entries.push_back(e);
    }
    return entries;
}

}  // namespace

TEST_CASE("one prediction per test id, order-aligned") {
    LoadResult lr = test::load_synthetic_shape("crt");
    DatasetSplit split = split_dataset(lr.dataset, 7);
    REQUIRE(split.test_ids.size() == 63);

    TemplateLibrary templates = lib();
    auto gw = test::make_mock_gateway(uniform_entries(
        63, "CRT Prediction: no catheter-related thrombosis\n\nExplanation: scripted."));
    DistributionSummary dist = summarize(lr.dataset, split.train_ids);

    PredictOptions opts;
    std::vector<Prediction> preds =
        predict_split(split.test_ids, lr.dataset, RuleBase(), dist, gw, templates, opts);
    REQUIRE(preds.size() == 63);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK(preds[i].id == split.test_ids[i]);
        CHECK(preds[i].label == 0);
        CHECK(preds[i].explanation == "scripted.");
    }
}

TEST_CASE("empty id list gives an empty result") {
    LoadResult lr = test::mini_dataset();
    TemplateLibrary templates = lib();
    auto gw = test::make_mock_gateway({});
    DistributionSummary dist = summarize(lr.dataset, {lr.dataset.records[0].id});
    CHECK(predict_split({}, lr.dataset, RuleBase(), dist, gw, templates, {}).empty());
}

TEST_CASE("parallel and sequential runs agree as multisets") {
    LoadResult lr = test::load_synthetic_shape("crt");
    DatasetSplit split = split_dataset(lr.dataset, 7);
    TemplateLibrary templates = lib();
    DistributionSummary dist = summarize(lr.dataset, split.train_ids);

    auto run = [&](int parallelism) {
        auto gw = test::make_mock_gateway(uniform_entries(
            63, "CRT Prediction: catheter-related thrombosis\n\nExplanation: same for all."));
        PredictOptions opts;
        opts.parallelism = parallelism;
        return predict_split(split.test_ids, lr.dataset, RuleBase(), dist, gw, templates, opts);
    };
    std::vector<Prediction> seq = run(1);
    std::vector<Prediction> par = run(4);

    auto key = [](const Prediction& p) { return p.id + "|" + std::to_string(p.label) + "|" + p.explanation; };
    std::vector<std::string> a, b;
    for (const auto& p : seq) a.push_back(key(p));
    for (const auto& p : par) b.push_back(key(p));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    // Order alignment holds regardless of scheduling.
    for (std::size_t i = 0; i < par.size(); ++i) CHECK(par[i].id == split.test_ids[i]);
}
