#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "rca/trainer.hpp"

using namespace rca;
namespace fs = std::filesystem;

namespace {

LabelLexicon crt_lexicon() {
    return LabelLexicon{"catheter-related thrombosis", "no catheter-related thrombosis", "CRT"};
}

TemplateLibrary lib() { return TemplateLibrary::load_dir(RCA_ASSET_DIR); }

TrainConfig base_config(int epochs, std::uint64_t seed = 7) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_capacity = 25;
    cfg.seed = seed;
    cfg.shuffle_per_epoch = false;  // deterministic ordinal mapping for scripts
    return cfg;
}

struct RunSetup {
    LoadResult lr;
    DatasetSplit split;
    DistributionSummary dist;
    RunSetup() : lr(test::load_synthetic_shape("crt")), split(split_dataset(lr.dataset, 7)),
                 dist(summarize(lr.dataset, split.train_ids)) {}
};

}  // namespace

TEST_CASE("parse_prediction handles the documented output shapes") {
    LabelLexicon lex = crt_lexicon();

    auto full = parse_prediction(
        "CRT Prediction: no catheter-related thrombosis\n\nExplanation: The GLR is in range.", lex);
    REQUIRE(full.has_value());
    CHECK(full->first == 0);
    CHECK(full->second == "The GLR is in range.");

    auto bare = parse_prediction("catheter-related thrombosis", lex);
    REQUIRE(bare.has_value());
    CHECK(bare->first == 1);
    CHECK(bare->second.empty());

    CHECK_FALSE(parse_prediction("I cannot decide.", lex).has_value());

    // The positive string is a substring of the negative one; negative wins.
    auto adversarial = parse_prediction("no catheter-related thrombosis", lex);
    REQUIRE(adversarial.has_value());
    CHECK(adversarial->first == 0);

    auto shouty = parse_prediction("CRT Prediction: NO CATHETER-RELATED THROMBOSIS", lex);
    REQUIRE(shouty.has_value());
    CHECK(shouty->first == 0);

    auto no_marker = parse_prediction("catheter-related thrombosis because D-dimer is high", lex);
    REQUIRE(no_marker.has_value());
    CHECK(no_marker->first == 1);
    CHECK(no_marker->second == "because D-dimer is high");
}

TEST_CASE("reflect_step replaces on success and keeps the base on empty output") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    const Dataset& ds = rs.lr.dataset;
    std::string batch = render_error_sample(ds.records[0], ds);
    std::string dist_text = render_distribution(rs.dist);
    RuleBase v2 = replace_rules(replace_rules(RuleBase(), {"a"}, UpdateCause::reflect, 1, 0), {"b"},
                                UpdateCause::reflect, 1, 1);

    StepOptions opts;
    opts.variant = "crt";
    opts.epoch = 2;
    opts.batch_index = 0;

    SUBCASE("six parsed rules give version+1 with six rules") {
        MockScriptEntry entry;
        entry.role = "reflect";
        entry.ordinal = 0;
        entry.response = "1. r1\n2. r2\n3. r3\n4. r4\n5. r5\n6. r6";
        entry.require_substring = batch;  // the error batch fills {samples} verbatim
        auto gw = test::make_mock_gateway({entry});
        RuleBase v3 = reflect_step(v2, batch, dist_text, gw, templates, opts);
        CHECK(v3.version() == 3);
        CHECK(v3.rules().size() == 6);
    }

    SUBCASE("empty output twice keeps the prior version") {
        MockScriptEntry empty1{"reflect", 0};
        empty1.response = "";
        MockScriptEntry empty2{"reflect", 1};
        empty2.response = "\n\n";
        auto gw = test::make_mock_gateway({empty1, empty2});
        RuleBase kept = reflect_step(v2, batch, dist_text, gw, templates, opts);
        CHECK(kept.version() == 2);
        CHECK(kept == v2);
    }
}

TEST_CASE("check_step always produces the next version") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    std::string dist_text = render_distribution(rs.dist);
    RuleBase rb = replace_rules(RuleBase(), {"r1", "r2", "r3", "r4", "r5"}, UpdateCause::reflect, 1, 0);

    StepOptions opts;
    opts.variant = "crt";
    opts.epoch = 1;

    SUBCASE("echo keeps identical texts") {
        MockScriptEntry echo{"check", 0};
        echo.response = render_rules(rb);
        echo.require_substring = "Previous distribution:\n" + dist_text;
        auto gw = test::make_mock_gateway({echo});
        RuleBase next = check_step(rb, dist_text, gw, templates, opts);
        CHECK(next.version() == rb.version() + 1);
        REQUIRE(next.rules().size() == rb.rules().size());
        for (std::size_t i = 0; i < next.rules().size(); ++i)
            CHECK(next.rules()[i].text == rb.rules()[i].text);
    }

    SUBCASE("dropping two of five keeps three") {
        MockScriptEntry drop{"check", 0};
        drop.response = "1. r1\n2. r3\n3. r5";
        auto gw = test::make_mock_gateway({drop});
        RuleBase next = check_step(rb, dist_text, gw, templates, opts);
        CHECK(next.rules().size() == 3);
    }

    SUBCASE("empty output deletes everything but still bumps the version") {
        MockScriptEntry wipe{"check", 0};
        wipe.response = "";
        auto gw = test::make_mock_gateway({wipe});
        RuleBase next = check_step(rb, dist_text, gw, templates, opts);
        CHECK(next.version() == rb.version() + 1);
        CHECK(next.rules().empty());
    }
}

TEST_CASE("reflection-count law over scripted error patterns") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    const std::vector<int> plan{0, 1, 24, 25, 26, 60};
    const std::vector<int> expected{0, 1, 1, 1, 2, 3};

    test::TrainScript script(rs.lr.dataset, rs.split);
    auto gw = test::make_mock_gateway(script.generate(plan, 25, /*with_check=*/true),
                                      test::mock_config(3, 4));
    TrainRun run = train(rs.lr.dataset, rs.split, rs.dist, base_config(6), gw, templates);

    REQUIRE(run.epochs.size() == 6);
    for (std::size_t e = 0; e < plan.size(); ++e) {
        CAPTURE(e);
        CHECK(run.epochs[e].train_errors == plan[e]);
        CHECK(run.epochs[e].reflections == expected[e]);
        CHECK(run.epochs[e].check_invoked);
    }

    // Total version = accepted updates: every reflect + one check per epoch.
    int expected_version = 0;
    for (int r : expected) expected_version += r;
    expected_version += 6;
    CHECK(run.snapshots.back().version() == expected_version);

    // Monotone versions with no gaps across the provenance log.
    const auto& provenance = run.snapshots.back().provenance();
    for (std::size_t i = 0; i < provenance.size(); ++i)
        CHECK(provenance[i].version == static_cast<int>(i) + 1);
}

TEST_CASE("zero errors with check on gives one check per epoch and no reflections") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    test::TrainScript script(rs.lr.dataset, rs.split);
    auto gw = test::make_mock_gateway(script.generate({0, 0, 0}, 25, true));
    TrainRun run = train(rs.lr.dataset, rs.split, rs.dist, base_config(3), gw, templates);
    for (const auto& epoch : run.epochs) {
        CHECK(epoch.reflections == 0);
        CHECK(epoch.check_invoked);
    }
    // v0 + one check bump per epoch.
    CHECK(run.snapshots.back().version() == 3);
}

TEST_CASE("validation predictions never enter the error batch") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    // Train answers are all correct, validation answers all wrong: if any
    // validation sample leaked into the buffer a reflect entry would be
    // consumed and the mock would abort on a missing entry.
    test::TrainScript script(rs.lr.dataset, rs.split);
    std::vector<MockScriptEntry> entries;
    for (const std::string& id : rs.split.train_ids) {
        int truth = rs.lr.dataset.record_by_id(id).label;
        entries.push_back(script.predict_entry(script.prediction_text(truth)));
    }
    entries.push_back(script.check_entry());
    for (const std::string& id : rs.split.val_ids) {
        int truth = rs.lr.dataset.record_by_id(id).label;
        entries.push_back(script.predict_entry(script.prediction_text(1 - truth)));
    }
    auto gw = test::make_mock_gateway(std::move(entries));
    TrainRun run = train(rs.lr.dataset, rs.split, rs.dist, base_config(1), gw, templates);
    CHECK(run.epochs[0].reflections == 0);
    CHECK(run.epochs[0].val_metrics.accuracy == doctest::Approx(0.0));
}

TEST_CASE("ablation: reflection off leaves version 0 and calls no rule LLMs") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    test::TrainScript script(rs.lr.dataset, rs.split);
    // Errors occur but neither reflect nor check entries exist in the script.
    auto entries = script.generate({30, 30}, 25, /*with_check=*/false, /*with_reflection=*/false);
    for (auto& e : entries)
        if (e.role == "predict")
            e.require_substring = "Here are some rules:\n\n(If it is empty, it means there is no rule.)";
    auto gw = test::make_mock_gateway(std::move(entries));

    TrainConfig cfg = base_config(2);
    cfg.use_reflection = false;  // check has nothing to review without rules
    TrainRun run = train(rs.lr.dataset, rs.split, rs.dist, cfg, gw, templates);
    CHECK(run.final_rulebase.version() == 0);
    for (const auto& epoch : run.epochs) {
        CHECK(epoch.reflections == 0);
        CHECK_FALSE(epoch.check_invoked);
        CHECK(epoch.train_errors == 30);
    }
}

TEST_CASE("ablation: check off leaves only reflect updates") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    test::TrainScript script(rs.lr.dataset, rs.split);
    auto gw = test::make_mock_gateway(script.generate({26}, 25, /*with_check=*/false));
    TrainConfig cfg = base_config(1);
    cfg.use_check = false;
    TrainRun run = train(rs.lr.dataset, rs.split, rs.dist, cfg, gw, templates);
    CHECK(run.epochs[0].reflections == 2);
    CHECK_FALSE(run.epochs[0].check_invoked);
    CHECK(run.snapshots.back().version() == 2);
}

TEST_CASE("ablation: no-distribution prompts drop the distribution header") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    fs::path log_path = fs::temp_directory_path() / "rca_trainer_abl_log.jsonl";
    fs::remove(log_path);
    auto log = std::make_shared<CallLog>(log_path.string());

    test::TrainScript script(rs.lr.dataset, rs.split);
    auto gw = test::make_mock_gateway(script.generate({26}, 25, true), test::mock_config(), log);
    TrainConfig cfg = base_config(1);
    cfg.use_distribution = false;
    train(rs.lr.dataset, rs.split, rs.dist, cfg, gw, templates);

    auto lines = split_lines(read_file(log_path.string()));
    std::size_t calls = 0;
    for (const auto& line : lines) {
        if (trim(line).empty()) continue;
        ++calls;
        CHECK(nlohmann::json::parse(line)["distribution_in_prompt"] == false);
    }
    CHECK(calls == rs.split.train_ids.size() + rs.split.val_ids.size() + 2 + 1);
    fs::remove(log_path);
}

TEST_CASE("identical config, dataset and script give identical artifacts") {
    RunSetup rs;
    TemplateLibrary templates = lib();

    auto run_once = [&](const std::string& dir) {
        fs::remove_all(dir);
        RunWriter writer(dir);
        test::TrainScript script(rs.lr.dataset, rs.split);
        auto gw = test::make_mock_gateway(script.generate({3, 27}, 25, true), test::mock_config(),
                                          writer.call_log());
        train(rs.lr.dataset, rs.split, rs.dist, base_config(2, 77), gw, templates, &writer);
    };
    std::string dir_a = (fs::temp_directory_path() / "rca_det_a").string();
    std::string dir_b = (fs::temp_directory_path() / "rca_det_b").string();
    run_once(dir_a);
    run_once(dir_b);
    for (const char* name : {"config.json", "rules.jsonl", "epochs.jsonl", "final_rulebase.json"}) {
        CAPTURE(name);
        CHECK(read_file(dir_a + "/" + name) == read_file(dir_b + "/" + name));
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("final rule base selection follows mcc, accuracy, then latest epoch") {
    auto fabricate = [](const std::vector<std::pair<double, double>>& mcc_acc) {
        TrainRun run;
        RuleBase rb;
        for (std::size_t i = 0; i < mcc_acc.size(); ++i) {
            rb = replace_rules(rb, {"rule " + std::to_string(i)}, UpdateCause::reflect,
                               static_cast<int>(i) + 1, 0);
            run.snapshots.push_back(rb);
            EpochReport report;
            report.epoch = static_cast<int>(i) + 1;
            report.val_metrics.mcc = mcc_acc[i].first;
            report.val_metrics.accuracy = mcc_acc[i].second;
            run.epochs.push_back(report);
        }
        return run;
    };

    TrainRun single = fabricate({{0.2, 0.6}});
    CHECK(select_best_epoch(single) == 0);

    TrainRun tie = fabricate({{0.1, 0.6}, {0.3, 0.7}, {0.3, 0.7}});
    CHECK(select_best_epoch(tie) == 2);  // exact tie -> latest epoch

    // Brute-force oracle over random metric vectors.
    SplitMix64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<double, double>> metrics;
        std::size_t epochs = 1 + rng.bounded(8);
        for (std::size_t e = 0; e < epochs; ++e)
            metrics.emplace_back(static_cast<double>(rng.bounded(5)) / 10.0,
                                 static_cast<double>(rng.bounded(5)) / 10.0);
        TrainRun run = fabricate(metrics);
        std::size_t best = 0;
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            auto key = [&](std::size_t j) {
                return std::tuple<double, double, std::size_t>(metrics[j].first, metrics[j].second, j);
            };
            if (key(i) >= key(best)) best = i;
        }
        CHECK(select_best_epoch(run) == best);
        CHECK(&select_final_rulebase(run) == &run.snapshots[best]);
    }
}

TEST_CASE("last_epoch selection strategy") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    test::TrainScript script(rs.lr.dataset, rs.split);
    auto gw = test::make_mock_gateway(script.generate({1, 1}, 25, true));
    TrainConfig cfg = base_config(2);
    cfg.selection = TrainConfig::Selection::last_epoch;
    TrainRun run = train(rs.lr.dataset, rs.split, rs.dist, cfg, gw, templates);
    CHECK(run.final_rulebase == run.snapshots.back());
    CHECK(run.selection_rationale.find("last_epoch") == 0);
}

TEST_CASE("parse failures retry the completion then fall back to negative") {
    RunSetup rs;
    TemplateLibrary templates = lib();
    const Dataset& ds = rs.lr.dataset;

    PredictOptions opts;
    opts.parse_retry_limit = 3;

    SUBCASE("garbage then valid") {
        std::vector<MockScriptEntry> entries;
        MockScriptEntry g1{"predict", 0};
        g1.response = "unhelpful";
        MockScriptEntry g2{"predict", 1};
        g2.response = "still unhelpful";
        MockScriptEntry ok{"predict", 2};
        ok.response = "CRT Prediction: catheter-related thrombosis\n\nExplanation: done.";
        auto gw = test::make_mock_gateway({g1, g2, ok});
        Prediction p = predict_record(ds.records[0], ds, "", "", gw, templates, opts);
        CHECK_FALSE(p.parse_failed);
        CHECK(p.label == 1);
    }

    SUBCASE("garbage throughout flags the sample as negative") {
        std::vector<MockScriptEntry> entries;
        for (long i = 0; i < 3; ++i) {
            MockScriptEntry g{"predict", i};
            g.response = "???";
            entries.push_back(g);
        }
        auto gw = test::make_mock_gateway(std::move(entries));
        Prediction p = predict_record(ds.records[0], ds, "", "", gw, templates, opts);
        CHECK(p.parse_failed);
        CHECK(p.label == 0);
    }
}
