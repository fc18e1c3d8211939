// circuitvec: batch pipeline driver.
//
// Subcommands wire ingestion -> expansion -> refinement -> training ->
// evaluation over a key=value config file with flag overrides (flags win).
// Exit codes: 0 success, 1 stability/assertion failure, 2 usage/validation,
// 3 I/O or input parse error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "circuitvec/pipeline.hpp"

namespace {

constexpr const char* kConfigEnvVar = "CIRCUITVEC_CONFIG";

// Every config key is exposed as a --flag of the same name (dashes for
// underscores) so a logged config and a command line stay interchangeable.
const std::vector<std::pair<std::string, std::string>> kConfigFlags = {
    {"graph", "edge list file (`u v` or `u v w` lines)"},
    {"weighted", "true when edge lines carry a weight"},
    {"alpha", "sink conductance scale"},
    {"expansion_size", "expanded neighborhood size e"},
    {"refinement_size", "refined neighborhood size r (<= e)"},
    {"k_max", "path enumeration cap per source"},
    {"dimensions", "embedding dimension d"},
    {"epochs", "training epochs"},
    {"learning_rate", "initial SGD learning rate"},
    {"learning_rate_floor", "linear decay floor"},
    {"negatives", "negative samples per pair"},
    {"noise_exponent", "noise distribution exponent"},
    {"seed", "64-bit seed for all random streams"},
    {"threads", "worker threads for the neighborhood phases"},
    {"labels", "label file (`node label...` lines)"},
    {"label_fraction", "fraction of labeled nodes used in evaluation"},
    {"folds", "cross-validation fold count"},
    {"l2_lambda", "logistic regression L2 strength"},
    {"out_expanded", "expanded neighborhood dump path"},
    {"out_refined", "refined neighborhood dump path"},
    {"out_embedding", "embedding output path"},
};

struct CommonArgs {
    std::string config_path;
    CLI::Option* config_opt = nullptr;
    std::string preset;
    CLI::Option* preset_opt = nullptr;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
};

void add_common_options(CLI::App* sub, CommonArgs& args) {
    args.config_opt = sub->add_option("--config", args.config_path,
                                      "config file path (default: $" +
                                          std::string(kConfigEnvVar) + ")");
    args.preset_opt =
        sub->add_option("--preset", args.preset, "apply a size preset: desk or full");
    for (const auto& [key, help] : kConfigFlags) {
        std::string flag = "--" + key;
        for (char& c : flag)
            if (c == '_') c = '-';
        args.options[key] = sub->add_option(flag, args.values[key], help);
    }
}

circuitvec::PipelineConfig resolve_config(const CommonArgs& args) {
    circuitvec::PipelineConfig cfg;
    std::string path = args.config_path;
    if (args.config_opt->count() == 0) {
        const char* env = std::getenv(kConfigEnvVar);
        if (env != nullptr && *env != '\0') path = env;
    }
    if (!path.empty()) cfg = circuitvec::PipelineConfig::from_file(path);
    if (args.preset_opt->count() > 0) cfg.apply_preset(args.preset);
    for (const auto& [key, option] : args.options)
        if (option->count() > 0) cfg.set(key, args.values.at(key));
    return cfg;
}

std::vector<std::size_t> parse_grid(const std::string& csv) {
    std::vector<std::size_t> grid;
    std::string token;
    std::istringstream in(csv);
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        grid.push_back(circuitvec::detail::parse_size(token));
    }
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic graph embeddings from electrical-circuit neighborhoods"};
    app.require_subcommand(1);

    CommonArgs nbr_args, embed_args, eval_args, stab_args, sweep_args;

    CLI::App* nbr = app.add_subcommand(
        "neighborhoods", "compute expansion and refinement dumps for every node");
    add_common_options(nbr, nbr_args);

    CLI::App* embed =
        app.add_subcommand("embed", "train embeddings (from the refined dump when present)");
    add_common_options(embed, embed_args);

    CLI::App* eval =
        app.add_subcommand("evaluate", "multi-label classification report for an embedding");
    add_common_options(eval, eval_args);

    CLI::App* stab =
        app.add_subcommand("stability", "re-run the pipeline and verify replay equality");
    add_common_options(stab, stab_args);
    std::size_t runs = 2;
    bool vary_seeds = false;
    stab->add_option("--runs", runs, "number of pipeline executions (>= 2)");
    stab->add_flag("--vary-seeds", vary_seeds,
                   "use a different seed per run and report deviations informationally");

    CLI::App* sweep =
        app.add_subcommand("sweep", "sensitivity table over one parameter grid");
    add_common_options(sweep, sweep_args);
    std::string sweep_param;
    std::string sweep_grid;
    sweep->add_option("--param", sweep_param,
                      "swept parameter: expansion_size, refinement_size, or dimensions")
        ->required();
    sweep->add_option("--grid", sweep_grid, "comma-separated grid values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return circuitvec::exit_code::kValidation;
    }

    auto with_config = [&](const CommonArgs& args, auto&& fn) {
        return circuitvec::run_command(std::cout, [&] {
            circuitvec::PipelineConfig cfg = resolve_config(args);
            return fn(cfg);
        });
    };

    if (nbr->parsed())
        return with_config(nbr_args, [&](const circuitvec::PipelineConfig& cfg) {
            return circuitvec::cmd_neighborhoods(cfg, std::cout);
        });
    if (embed->parsed())
        return with_config(embed_args, [&](const circuitvec::PipelineConfig& cfg) {
            return circuitvec::cmd_embed(cfg, std::cout);
        });
    if (eval->parsed())
        return with_config(eval_args, [&](const circuitvec::PipelineConfig& cfg) {
            return circuitvec::cmd_evaluate(cfg, std::cout);
        });
    if (stab->parsed())
        return with_config(stab_args, [&](const circuitvec::PipelineConfig& cfg) {
            return circuitvec::cmd_stability(cfg, runs, vary_seeds, std::cout);
        });
    if (sweep->parsed())
        return with_config(sweep_args, [&](const circuitvec::PipelineConfig& cfg) {
            return circuitvec::cmd_sweep(cfg, sweep_param, parse_grid(sweep_grid), std::cout);
        });
    return circuitvec::exit_code::kValidation;
}
