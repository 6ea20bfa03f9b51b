// Synthetic dataset generator: shape-faithful stand-ins for the clinical
// tables (the real CRT data is private). Writes data.csv + schema.json.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rca/synthetic.hpp"
#include "rca/text.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic dataset fixture generator"};
    rca::SyntheticSpec spec;
    std::string out_dir = "fixture";
    app.add_option("--shape", spec.shape, "crt | diabetes | heart_disease")
        ->check(CLI::IsMember({"crt", "diabetes", "heart_disease"}));
    app.add_option("--rows", spec.rows, "row count (0 = shape default)");
    app.add_option("--seed", spec.seed, "generator seed");
    app.add_option("--out", out_dir, "output directory");
    CLI11_PARSE(app, argc, argv);

    try {
        rca::SyntheticDataset fixture = rca::make_synthetic(spec);
        std::filesystem::create_directories(out_dir);
        std::filesystem::path dir(out_dir);
        rca::write_file((dir / "data.csv").string(), fixture.csv);
        rca::write_file((dir / "schema.json").string(), fixture.schema.dump(2) + "\n");
        std::cout << "wrote " << (dir / "data.csv").string() << " and " << (dir / "schema.json").string()
                  << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
