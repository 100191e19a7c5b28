// solvable: compose, verify and export zero-energy solvable potentials from recipe files.
//
// Exit codes: 0 all checks pass, 1 verification failed (report still written),
// 2 invalid recipe or command line.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "solvable/solvable.hpp"

namespace fs = std::filesystem;
using namespace solvable;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

fs::path default_out_dir() {
    if (const char* env = std::getenv("SOLVABLE_OUT_DIR"); env && *env) return env;
    return ".";
}

void print_catalog(const std::vector<CatalogInfo>& rows) {
    std::printf("%-22s %-5s %-32s %s\n", "name", "code", "potential", "validity");
    for (const auto& info : rows) {
        std::printf("%-22s %-5s %-32s %s\n", info.key.c_str(), info.code.c_str(), info.form.c_str(),
                    info.validity.c_str());
    }
}

void print_summary(const RunResult& result) {
    for (const auto& rep : result.reports) {
        std::printf("level %d %-10s %s  residual %.3e on [%g, %g]  nodes %d/%d\n", rep.depth, rep.engine.c_str(),
                    rep.passed() ? "PASS" : "FAIL", rep.residual_max, rep.window_lo, rep.window_hi,
                    rep.node_count_inner, rep.node_count_composed);
        for (const auto& c : rep.checks) {
            if (!c.passed) {
                std::printf("  failed %-24s %.3e (threshold %.3e) %s\n", c.name.c_str(), c.value, c.threshold,
                            c.detail.c_str());
            }
        }
    }
    if (result.error) std::printf("error: %s\n", result.error->c_str());
    std::printf("%s\n", result.passed() ? "PASS" : "FAIL");
}

void print_checks(const RunResult& result) {
    for (const auto& rep : result.reports) {
        std::printf("level %d (%s)\n", rep.depth, rep.engine.c_str());
        for (const auto& c : rep.checks) {
            std::printf("  %-4s %-26s %.3e  threshold %.3e  %s\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.value,
                        c.threshold, c.detail.c_str());
        }
        for (const auto& n : rep.notes) std::printf("  note: %s\n", n.c_str());
    }
    if (result.error) std::printf("error: %s\n", result.error->c_str());
    std::printf("%s\n", result.passed() ? "PASS" : "FAIL");
}

Recipe load(const std::string& path, std::optional<double> tol) {
    Recipe recipe = load_recipe(path);
    if (tol) {
        if (!(*tol > 0.0)) throw RecipeError("--tol", "must be positive");
        recipe.tolerances.residual = *tol;
    }
    return recipe;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_plot(const fs::path& path, const CompositionRecord& rec) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_plot_csv(out, rec);
}

int exit_code(const RunResult& result) { return result.passed() ? kExitPass : kExitFail; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-energy solvable potentials: catalog, compositions and their checks"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<double> tol;
    app.add_option("--tol", tol, "Residual tolerance (overrides the recipe)");

    std::string filter;
    bool catalog_json_flag = false;
    auto* catalog = app.add_subcommand("catalog", "List the catalog of solvable potentials");
    catalog->add_option("--filter", filter, "Only entries carrying this tag");
    catalog->add_flag("--json", catalog_json_flag, "Machine-readable output");

    std::string recipe_path;
    std::string out_dir;
    auto* compose_cmd = app.add_subcommand("compose", "Compose, verify and write the report");
    compose_cmd->add_option("recipe", recipe_path, "Recipe file")->required()->check(CLI::ExistingFile);
    compose_cmd->add_option("--out", out_dir, "Output directory (default $SOLVABLE_OUT_DIR or .)");

    bool verify_json = false;
    auto* verify_cmd = app.add_subcommand("verify", "Run every check and print the results");
    verify_cmd->add_option("recipe", recipe_path, "Recipe file")->required()->check(CLI::ExistingFile);
    verify_cmd->add_flag("--json", verify_json, "Print the full report as JSON");

    auto* plot_cmd = app.add_subcommand("export-plot", "Write r, V, phi, x as CSV");
    plot_cmd->add_option("recipe", recipe_path, "Recipe file")->required()->check(CLI::ExistingFile);
    plot_cmd->add_option("--out", out_dir, "Output directory (default $SOLVABLE_OUT_DIR or .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*catalog) {
            const auto rows = catalog_filter(filter);
            if (catalog_json_flag) {
                std::cout << catalog_json(rows).dump(2) << '\n';
            } else {
                print_catalog(rows);
            }
            return kExitPass;
        }

        const Recipe recipe = load(recipe_path, tol);
        const fs::path dir = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
        const std::string stem = fs::path(recipe_path).stem().string();

        if (*verify_cmd) {
            const RunResult result = run_recipe(recipe);
            if (verify_json) {
                std::cout << run_json(recipe, result).dump(2) << '\n';
            } else {
                print_checks(result);
            }
            return exit_code(result);
        }

        const RunResult result = run_recipe(recipe);
        if (*compose_cmd) {
            if (recipe.wants("report")) {
                const fs::path path = dir / (stem + ".report.json");
                write_text(path, run_json(recipe, result).dump(2) + "\n");
                std::printf("report: %s\n", path.string().c_str());
            }
            if (recipe.wants("plot") && result.record) {
                const fs::path path = dir / (stem + ".csv");
                write_plot(path, *result.record);
                std::printf("plot: %s\n", path.string().c_str());
            }
            print_summary(result);
            return exit_code(result);
        }

        if (*plot_cmd) {
            if (!result.record) {
                print_summary(result);
                return kExitFail;
            }
            const fs::path path = dir / (stem + ".csv");
            write_plot(path, *result.record);
            std::printf("plot: %s\n", path.string().c_str());
            print_summary(result);
            return exit_code(result);
        }
    } catch (const RecipeError& e) {
        std::fprintf(stderr, "invalid recipe: %s\n", e.what());
        return kExitInput;
    } catch (const InvalidParameter& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFail;
    }
    return kExitInput;
}
