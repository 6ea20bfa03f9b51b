#include "rca/synthetic.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "rca/csv.hpp"
#include "rca/rng.hpp"

namespace rca {

using nlohmann::json;

namespace {

double uniform(SplitMix64& rng, double lo, double hi) {
    double u = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string integer(SplitMix64& rng, long lo, long hi) {
    return std::to_string(lo + static_cast<long>(rng.bounded(static_cast<std::uint64_t>(hi - lo + 1))));
}

std::string pick(SplitMix64& rng, const std::vector<std::string>& options) {
    return options[rng.bounded(options.size())];
}

std::string yes_no(SplitMix64& rng, double p_yes) {
    return uniform(rng, 0, 1) < p_yes ? "1" : "0";
}

std::vector<int> label_vector(std::size_t rows, std::size_t positives, SplitMix64& rng) {
    std::vector<int> labels(rows, 0);
    for (std::size_t i = 0; i < positives && i < rows; ++i) labels[i] = 1;
    fisher_yates(labels, rng);
    return labels;
}

json bool_feature(const std::string& name, const std::string& present, const std::string& absent) {
    return json{{"name", name},
                {"kind", "categorical"},
                {"boolean_phrasing", json{{"present", present}, {"absent", absent}}}};
}

json value_feature(const std::string& name, const std::string& kind, const std::string& tmpl) {
    return json{{"name", name}, {"kind", kind}, {"narrative_template", tmpl}};
}

SyntheticDataset make_crt(std::size_t rows, std::size_t positives, SplitMix64& rng) {
    json schema{
        {"variant", "crt"},
        {"label_column", "CRT"},
        {"label_tokens", json{{"positive", json::array({"1"})}, {"negative", json::array({"0"})}}},
        {"label_lexicon", json{{"positive_text", "catheter-related thrombosis"},
                               {"negative_text", "no catheter-related thrombosis"},
                               {"disease_name", "CRT"}}},
    };
    json features = json::array();
    features.push_back(value_feature("Granulocyte-to-lymphocyte ratio", "numerical",
                                     "Granulocyte-to-lymphocyte ratio is {value}"));
    features.push_back(value_feature("D-dimer", "numerical", "D-dimer is {value}"));
    features.push_back(bool_feature("chemotherapy", "chemotherapy", "no chemotherapy"));
    features.push_back(value_feature("catheterization", "categorical", "catheterization is {value}"));
    features.push_back(bool_feature("thoracic therapy", "thoracic therapy", "no thoracic therapy"));
    features.push_back(value_feature("age at hospital", "numerical", "age at hospital is {value}"));
    features.push_back(value_feature("platelet", "numerical", "platelet is {value}"));
    features.push_back(value_feature("hemoglobin", "numerical", "hemoglobin is {value}"));
    features.push_back(value_feature("BMI", "numerical", "BMI is {value}"));
    features.push_back(value_feature("gender", "categorical", "gender is {value}"));
    features.push_back(bool_feature("history of previous catheterization",
                                    "history of previous catheterization",
                                    "no history of previous catheterization"));
    features.push_back(bool_feature("history of previous catheter related thrombosis",
                                    "history of previous catheter related thrombosis",
                                    "no history of previous catheter related thrombosis"));
    features.push_back(bool_feature("lung cancer", "lung cancer", "no lung cancer"));
    features.push_back(bool_feature("gastric cancer", "gastric cancer", "no gastric cancer"));
    features.push_back(bool_feature("lymphoma", "lymphoma", "no lymphoma"));
    features.push_back(bool_feature("gynecologic tumors", "gynecologic tumors", "no gynecologic tumors"));
    features.push_back(bool_feature("urologic tumors", "urologic tumors", "no urologic tumors"));
    schema["features"] = features;

    std::vector<int> labels = label_vector(rows, positives, rng);
    std::ostringstream csv;
    csv << "Granulocyte-to-lymphocyte ratio,D-dimer,chemotherapy,catheterization,thoracic therapy,"
           "age at hospital,platelet,hemoglobin,BMI,gender,history of previous catheterization,"
           "history of previous catheter related thrombosis,lung cancer,gastric cancer,lymphoma,"
           "gynecologic tumors,urologic tumors,CRT\n";
    const std::vector<std::string> catheters{"CVC(Central Venous Catheter)",
                                             "PICC(Peripherally Inserted Central Catheter)"};
    for (std::size_t r = 0; r < rows; ++r) {
        bool pos = labels[r] == 1;
        std::vector<std::string> row;
        row.push_back(fixed(uniform(rng, 0.4, pos ? 9.0 : 6.0), 2));        // GLR
        row.push_back(fixed(uniform(rng, 0.05, pos ? 8.0 : 2.5), 2));       // D-dimer
        row.push_back(yes_no(rng, 0.6));                                    // chemotherapy
        row.push_back(pick(rng, catheters));                                // catheterization
        row.push_back(yes_no(rng, 0.25));                                   // thoracic therapy
        row.push_back(integer(rng, 18, 85));                                // age at hospital
        row.push_back(fixed(uniform(rng, 80, 520), 1));                     // platelet
        row.push_back(fixed(uniform(rng, 72, 168), 1));                     // hemoglobin
        row.push_back(fixed(uniform(rng, 15.5, 35.5), 2));                  // BMI
        row.push_back(pick(rng, {"male", "female"}));                       // gender
        row.push_back(yes_no(rng, 0.4));                                    // hx catheterization
        row.push_back(yes_no(rng, pos ? 0.2 : 0.05));                       // hx CRT
        row.push_back(yes_no(rng, 0.2));                                    // lung cancer
        row.push_back(yes_no(rng, 0.15));                                   // gastric cancer
        row.push_back(yes_no(rng, 0.1));                                    // lymphoma
        row.push_back(yes_no(rng, 0.12));                                   // gynecologic tumors
        row.push_back(yes_no(rng, 0.08));                                   // urologic tumors
        row.push_back(labels[r] ? "1" : "0");
        write_csv_row(csv, row);
    }
    return {csv.str(), schema};
}

SyntheticDataset make_diabetes(std::size_t rows, std::size_t positives, SplitMix64& rng) {
    json schema{
        {"variant", "diabetes"},
        {"label_column", "Outcome"},
        {"label_tokens", json{{"positive", json::array({"1"})}, {"negative", json::array({"0"})}}},
        {"label_lexicon", json{{"positive_text", "diabetes"},
                               {"negative_text", "no diabetes"},
                               {"disease_name", "Diabetes"}}},
    };
    json features = json::array();
    features.push_back(
        value_feature("Number of pregnancies", "categorical", "Number of pregnancies is {value}"));
    features.push_back(value_feature("Plasma glucose concentration (2-hour test) level", "numerical",
                                     "Plasma glucose concentration (2-hour test) level is {value}"));
    features.push_back(value_feature("Diastolic blood pressure", "numerical",
                                     "Diastolic blood pressure is {value} mm Hg"));
    features.push_back(value_feature("Triceps skin fold thickness", "numerical",
                                     "Triceps skin fold thickness is {value} mm"));
    features.push_back(value_feature("2-Hour serum insulin level", "numerical",
                                     "2-Hour serum insulin level is {value} mu U/ml"));
    features.push_back(value_feature("BMI", "numerical", "BMI is {value}"));
    features.push_back(value_feature("DiabetesPedigreeFunction(Genetic diabetes score)", "numerical",
                                     "DiabetesPedigreeFunction(Genetic diabetes score) is {value}"));
    features.push_back(value_feature("Age", "numerical", "Age is {value}"));
    schema["features"] = features;

    std::vector<int> labels = label_vector(rows, positives, rng);
    std::ostringstream csv;
    csv << "Number of pregnancies,Plasma glucose concentration (2-hour test) level,"
           "Diastolic blood pressure,Triceps skin fold thickness,2-Hour serum insulin level,BMI,"
           "DiabetesPedigreeFunction(Genetic diabetes score),Age,Outcome\n";
    for (std::size_t r = 0; r < rows; ++r) {
        bool pos = labels[r] == 1;
        std::vector<std::string> row;
        row.push_back(integer(rng, 0, 10));
        row.push_back(integer(rng, pos ? 120 : 65, pos ? 210 : 165));  // glucose
        row.push_back(integer(rng, 40, 110));
        row.push_back(integer(rng, 0, 55));
        row.push_back(integer(rng, 0, 480));
        row.push_back(fixed(uniform(rng, 17.5, pos ? 48.0 : 40.0), 1));
        row.push_back(fixed(uniform(rng, 0.08, 2.2), 3));
        row.push_back(integer(rng, 21, 75));
        row.push_back(labels[r] ? "1" : "0");
        write_csv_row(csv, row);
    }
    return {csv.str(), schema};
}

SyntheticDataset make_heart(std::size_t rows, std::size_t positives, SplitMix64& rng) {
    json schema{
        {"variant", "heart_disease"},
        {"label_column", "Heart Disease Status"},
        {"label_tokens", json{{"positive", json::array({"Yes"})}, {"negative", json::array({"No"})}}},
        {"label_lexicon", json{{"positive_text", "heart disease"},
                               {"negative_text", "no heart disease"},
                               {"disease_name", "Heart Disease"}}},
    };
    const std::vector<std::pair<std::string, std::string>> spec_list{
        {"Age", "numerical"},
        {"Gender", "categorical"},
        {"Blood Pressure", "numerical"},
        {"Cholesterol Level", "numerical"},
        {"Exercise Habits", "categorical"},
        {"Smoking", "categorical"},
        {"Family Heart Disease", "categorical"},
        {"Diabetes", "categorical"},
        {"BMI", "numerical"},
        {"High Blood Pressure", "categorical"},
        {"Low HDL Cholesterol", "categorical"},
        {"High LDL Cholesterol", "categorical"},
        {"Stress Level", "categorical"},
        {"Sleep Hours", "numerical"},
        {"Sugar Consumption", "categorical"},
        {"Triglyceride Level", "numerical"},
        {"Fasting Blood Sugar", "numerical"},
        {"CRP Level", "numerical"},
        {"Homocysteine Level", "numerical"},
    };
    json features = json::array();
    for (const auto& [name, kind] : spec_list)
        features.push_back(value_feature(name, kind, name + " is {value}"));
    schema["features"] = features;

    std::vector<int> labels = label_vector(rows, positives, rng);
    std::ostringstream csv;
    {
        std::vector<std::string> header;
        for (const auto& [name, _] : spec_list) header.push_back(name);
        header.push_back("Heart Disease Status");
        write_csv_row(csv, header);
    }
    const std::vector<std::string> levels{"Low", "Medium", "High"};
    const std::vector<std::string> yn{"Yes", "No"};
    for (std::size_t r = 0; r < rows; ++r) {
        bool pos = labels[r] == 1;
        std::vector<std::string> row;
        row.push_back(fixed(uniform(rng, 20, 85), 1));                        // Age
        row.push_back(pick(rng, {"Male", "Female"}));                         // Gender
        row.push_back(fixed(uniform(rng, 92, pos ? 205 : 175), 1));           // Blood Pressure
        row.push_back(fixed(uniform(rng, 120, 350), 1));                      // Cholesterol Level
        row.push_back(pick(rng, levels));                                     // Exercise Habits
        row.push_back(pick(rng, yn));                                         // Smoking
        row.push_back(pick(rng, yn));                                         // Family Heart Disease
        row.push_back(pick(rng, yn));                                         // Diabetes
        row.push_back(fixed(uniform(rng, 16.0, 42.0), 15));                   // BMI
        row.push_back(pick(rng, yn));                                         // High Blood Pressure
        row.push_back(pick(rng, yn));                                         // Low HDL Cholesterol
        row.push_back(pick(rng, yn));                                         // High LDL Cholesterol
        row.push_back(pick(rng, levels));                                     // Stress Level
        row.push_back(fixed(uniform(rng, 3.5, 9.5), 15));                     // Sleep Hours
        row.push_back(pick(rng, levels));                                     // Sugar Consumption
        row.push_back(fixed(uniform(rng, 50, 400), 1));                       // Triglyceride Level
        row.push_back(fixed(uniform(rng, 70, 160), 1));                       // Fasting Blood Sugar
        row.push_back(fixed(uniform(rng, 0.1, pos ? 14.5 : 9.0), 14));        // CRP Level
        row.push_back(fixed(uniform(rng, 4.5, 17.5), 15));                    // Homocysteine Level
        row.push_back(labels[r] ? "Yes" : "No");
        write_csv_row(csv, row);
    }
    return {csv.str(), schema};
}

}  // namespace

SyntheticDataset make_synthetic(const SyntheticSpec& spec) {
    SplitMix64 rng(spec.seed);
    auto scaled = [&](std::size_t default_rows, std::size_t default_pos) {
        std::size_t rows = spec.rows ? spec.rows : default_rows;
        std::size_t positives = spec.rows
                                    ? (rows * default_pos + default_rows / 2) / default_rows
                                    : default_pos;
        if (positives == 0) positives = 1;
        return std::make_pair(rows, positives);
    };
    if (spec.shape == "crt") {
        auto [rows, positives] = scaled(315, 32);
        return make_crt(rows, positives, rng);
    }
    if (spec.shape == "diabetes") {
        auto [rows, positives] = scaled(415, 153);
        return make_diabetes(rows, positives, rng);
    }
    if (spec.shape == "heart_disease") {
        auto [rows, positives] = scaled(965, 193);
        return make_heart(rows, positives, rng);
    }
    throw std::runtime_error("unknown synthetic shape: " + spec.shape);
}

}  // namespace rca
