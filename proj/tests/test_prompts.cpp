#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>

#include "helpers.hpp"
#include "rca/prompts.hpp"
#include "rca/rules.hpp"

using namespace rca;

namespace {

TemplateLibrary lib() { return TemplateLibrary::load_dir(RCA_ASSET_DIR); }

std::map<std::string, std::string> binding_map() {
    auto doc = test::golden_bindings();
    std::map<std::string, std::string> m;
    for (auto& [k, v] : doc.items()) m[k] = v.get<std::string>();
    return m;
}

}  // namespace

TEST_CASE("all nine templates render byte-identically to the goldens") {
    TemplateLibrary templates = lib();
    auto bindings = binding_map();
    for (const char* role : {"prediction", "reflection", "check"}) {
        for (const char* variant : {"crt", "diabetes", "heart_disease"}) {
            CAPTURE(role);
            CAPTURE(variant);
            std::string rendered = render_prompt(templates.get(role, variant), bindings);
            std::string golden = read_file(std::string(RCA_GOLDEN_DIR) + "/" + role + "_" + variant +
                                           ".golden.txt");
            CHECK(rendered == golden);
        }
    }
}

TEST_CASE("golden bindings match what the owning modules render") {
    // The bindings file is not free-form: features/samples/rules must equal
    // real module output for the mini fixture.
    auto bindings = binding_map();
    LoadResult lr = test::mini_dataset();
    const Dataset& ds = lr.dataset;
    CHECK(render_narrative(ds.records[0], ds) == bindings["features"]);
    CHECK(concat_error_batch({render_error_sample(ds.records[0], ds),
                              render_error_sample(ds.records[1], ds)}) == bindings["samples"]);
    RuleBase rb = replace_rules(
        RuleBase(),
        {"If D-dimer exceeds the learned threshold, predict catheter-related thrombosis.",
         "Central venous catheters raise risk more than peripheral lines."},
        UpdateCause::reflect, 1, 0);
    CHECK(render_rules(rb) == bindings["rules"]);
}

TEST_CASE("templates carry the documented anchor phrases") {
    TemplateLibrary templates = lib();
    CHECK(templates.get("prediction", "crt").body.find("(1) CRT Prediction, which should be either") !=
          std::string::npos);
    CHECK(templates.get("prediction", "crt").body.find("(If it is empty, it means there is no rule.)") !=
          std::string::npos);
    CHECK(templates.get("reflection", "crt").body.find("improve based on self reflection") !=
          std::string::npos);
    CHECK(templates.get("reflection", "crt").body.find(
              "(If it is empty, it means summarizing the initial rules)") != std::string::npos);
    CHECK(templates.get("check", "crt").body.find("check and delete the error rules") !=
          std::string::npos);
    CHECK(templates.get("check", "crt").body.find("too specific for certain patient are awful") !=
          std::string::npos);
    CHECK(templates.get("check", "crt").body.find("Previous distribution:") != std::string::npos);
}

TEST_CASE("rendering with a full binding leaves no placeholder tokens") {
    TemplateLibrary templates = lib();
    auto bindings = binding_map();
    for (const char* role : {"prediction", "reflection", "check"}) {
        for (const char* variant : {"crt", "diabetes", "heart_disease"}) {
            std::string rendered = render_prompt(templates.get(role, variant), bindings);
            for (const char* token : {"{rules}", "{distribution}", "{samples}", "{features}"})
                CHECK(rendered.find(token) == std::string::npos);
        }
    }
}

TEST_CASE("missing binding raises a named error") {
    TemplateLibrary templates = lib();
    auto bindings = binding_map();
    bindings.erase("distribution");
    try {
        render_prompt(templates.get("prediction", "crt"), bindings);
        FAIL("expected UnboundPlaceholderError");
    } catch (const UnboundPlaceholderError& e) {
        CHECK(e.placeholder == "distribution");
    }
}

TEST_CASE("unknown variant is an error") {
    TemplateLibrary templates = lib();
    CHECK_THROWS_AS(templates.get("prediction", "sepsis"), std::runtime_error);
    CHECK(templates.has("prediction", "crt"));
    CHECK_FALSE(templates.has("prediction", "sepsis"));
}

TEST_CASE("builders fill the template sections") {
    TemplateLibrary templates = lib();
    auto bindings = binding_map();

    std::string prediction = build_prediction_prompt(templates, "crt", bindings["features"], "",
                                                     bindings["distribution"]);
    CHECK(prediction.find("Here are some rules:\n\n(If it is empty, it means there is no rule.)") !=
          std::string::npos);
    CHECK(prediction.find(bindings["features"]) != std::string::npos);

    std::string reflection = build_reflection_prompt(templates, "crt", bindings["samples"], "",
                                                     bindings["distribution"]);
    CHECK(reflection.find("Wrong samples:\nFeatures: ") != std::string::npos);

    std::string check = build_check_prompt(templates, "crt", bindings["rules"], bindings["distribution"]);
    CHECK(check.find("Previous distribution:\nGranulocyte-to-lymphocyte ratio:") != std::string::npos);
}

TEST_CASE("distribution section strips cleanly from every template") {
    TemplateLibrary templates = lib();
    auto bindings = binding_map();
    for (const char* role : {"prediction", "reflection", "check"}) {
        for (const char* variant : {"crt", "diabetes", "heart_disease"}) {
            CAPTURE(role);
            CAPTURE(variant);
            PromptTemplate t = templates.get(role, variant);
            std::string stripped = strip_distribution_section(t.body);
            CHECK_FALSE(contains_distribution_header(stripped));
            CHECK(stripped.find("{distribution}") == std::string::npos);
            CHECK(stripped.find("(END OF DISTRIBUTION)") == std::string::npos);
            CHECK(stripped.find("\n\n\n") == std::string::npos);  // no double blanks left behind
            // Everything else survives.
            CHECK(stripped.find("{rules}") != std::string::npos);
        }
    }

    std::string prediction = build_prediction_prompt(templates, "crt", bindings["features"], "",
                                                     bindings["distribution"], false);
    CHECK_FALSE(contains_distribution_header(prediction));
}

TEST_CASE("judge prompt embeds the rubric and the explanation") {
    TemplateLibrary templates = lib();
    std::string prompt = build_judge_prompt(templates, "The risk factors balance out.",
                                            std::optional<std::string>("D-dimer is 0.84."));
    CHECK(prompt.find("encompassing both factors supporting and opposing") != std::string::npos);
    std::size_t bands = 0;
    for (std::size_t pos = prompt.find("7-10 points:"); pos != std::string::npos;
         pos = prompt.find("7-10 points:", pos + 1))
        ++bands;
    CHECK(bands == 4);
    CHECK(prompt.find("The risk factors balance out.") != std::string::npos);
    CHECK(prompt.find("D-dimer is 0.84.") != std::string::npos);

    std::string no_context = build_judge_prompt(templates, "Short explanation.", std::nullopt);
    CHECK(no_context.find("Patient features:") == std::string::npos);

    CHECK_THROWS_AS(build_judge_prompt(templates, "   ", std::nullopt), std::runtime_error);
}

TEST_CASE("template assets reject undeclared placeholders") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "rca_bad_templates";
    fs::create_directories(dir);
    write_file((dir / "prediction_custom.txt").string(), "Hello {who}\n");
    CHECK_THROWS_AS(TemplateLibrary::load_dir(dir.string()), std::runtime_error);
    fs::remove_all(dir);
}
