#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "circuitvec/evaluation.hpp"
#include "circuitvec/expansion.hpp"
#include "circuitvec/graph.hpp"
#include "circuitvec/io.hpp"
#include "circuitvec/refinement.hpp"
#include "circuitvec/skipgram.hpp"

namespace circuitvec {

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kStabilityFailure = 1;
inline constexpr int kValidation = 2;
inline constexpr int kIo = 3;
}  // namespace exit_code

/// Fully resolved batch configuration. Serializes to a flat key=value file
/// that reloads to an identical config, so every logged run is replayable.
struct PipelineConfig {
    std::string graph_path;
    bool weighted = false;
    double alpha = 1.0;
    std::size_t expansion_size = 1200;
    std::size_t refinement_size = 800;
    std::size_t k_max = 10000;
    std::size_t dimensions = 128;
    std::size_t epochs = 5;
    double learning_rate = 0.025;
    double learning_rate_floor = 0.0001;
    std::size_t negatives = 5;
    double noise_exponent = 0.75;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string labels_path;
    double label_fraction = 1.0;
    std::size_t folds = 10;
    double l2_lambda = 0.01;
    std::string out_expanded = "expanded.txt";
    std::string out_refined = "refined.txt";
    std::string out_embedding = "embeddings.txt";

    void validate() const {
        if (graph_path.empty()) throw std::invalid_argument("config: graph path is required");
        if (expansion_size < 1 || refinement_size < 1)
            throw std::invalid_argument("config: neighborhood sizes must be >= 1");
        if (refinement_size > expansion_size)
            throw std::invalid_argument("config: refinement_size must not exceed expansion_size");
        if (!(alpha > 0.0)) throw std::invalid_argument("config: alpha must be positive");
        if (k_max < 1) throw std::invalid_argument("config: k_max must be >= 1");
        if (dimensions < 1) throw std::invalid_argument("config: dimensions must be >= 1");
        if (!(learning_rate > 0.0))
            throw std::invalid_argument("config: learning_rate must be positive");
        if (folds < 2) throw std::invalid_argument("config: folds must be >= 2");
        if (!(label_fraction > 0.0) || label_fraction > 1.0)
            throw std::invalid_argument("config: label_fraction must be in (0, 1]");
        if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    }

    /// Applies desk- or full-scale neighborhood and dimension presets.
    void apply_preset(const std::string& name) {
        if (name == "desk") {
            expansion_size = 40;
            refinement_size = 20;
            dimensions = 16;
        } else if (name == "full") {
            expansion_size = 1200;
            refinement_size = 800;
            dimensions = 128;
        } else {
            throw std::invalid_argument("unknown preset '" + name + "'");
        }
    }

    void set(const std::string& key, const std::string& value);
    std::string to_key_values() const;

    static PipelineConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file '" + path + "'");
        PipelineConfig cfg;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string trimmed = detail_trim(line);
            if (trimmed.empty() || trimmed.front() == '#') continue;
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ParseError("config line is not `key = value`", line_no);
            cfg.set(detail_trim(trimmed.substr(0, eq)), detail_trim(trimmed.substr(eq + 1)));
        }
        return cfg;
    }

private:
    static std::string detail_trim(const std::string& s) {
        auto begin = s.find_first_not_of(" \t\r");
        if (begin == std::string::npos) return "";
        auto end = s.find_last_not_of(" \t\r");
        return s.substr(begin, end - begin + 1);
    }
};

namespace detail {

inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::size_t parse_size(const std::string& v) {
    std::size_t consumed = 0;
    long long parsed = std::stoll(v, &consumed);
    if (consumed != v.size() || parsed < 0) throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(parsed);
}

inline double parse_double(const std::string& v) {
    std::size_t consumed = 0;
    double parsed = std::stod(v, &consumed);
    if (consumed != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
    return parsed;
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("expected true/false, got '" + v + "'");
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

inline void PipelineConfig::set(const std::string& key, const std::string& value) {
    try {
        if (key == "graph") graph_path = value;
        else if (key == "weighted") weighted = detail::parse_bool(value);
        else if (key == "alpha") alpha = detail::parse_double(value);
        else if (key == "expansion_size") expansion_size = detail::parse_size(value);
        else if (key == "refinement_size") refinement_size = detail::parse_size(value);
        else if (key == "k_max") k_max = detail::parse_size(value);
        else if (key == "dimensions") dimensions = detail::parse_size(value);
        else if (key == "epochs") epochs = detail::parse_size(value);
        else if (key == "learning_rate") learning_rate = detail::parse_double(value);
        else if (key == "learning_rate_floor") learning_rate_floor = detail::parse_double(value);
        else if (key == "negatives") negatives = detail::parse_size(value);
        else if (key == "noise_exponent") noise_exponent = detail::parse_double(value);
        else if (key == "seed") {
            std::size_t consumed = 0;
            seed = std::stoull(value, &consumed);
            if (consumed != value.size())
                throw std::invalid_argument("invalid seed '" + value + "'");
        }
        else if (key == "threads") threads = static_cast<unsigned>(detail::parse_size(value));
        else if (key == "labels") labels_path = value;
        else if (key == "label_fraction") label_fraction = detail::parse_double(value);
        else if (key == "folds") folds = detail::parse_size(value);
        else if (key == "l2_lambda") l2_lambda = detail::parse_double(value);
        else if (key == "out_expanded") out_expanded = value;
        else if (key == "out_refined") out_refined = value;
        else if (key == "out_embedding") out_embedding = value;
        else throw std::invalid_argument("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid value '" + value + "' for config key '" + key + "'");
    }
}

inline std::string PipelineConfig::to_key_values() const {
    std::ostringstream out;
    out << "graph = " << graph_path << '\n'
        << "weighted = " << (weighted ? "true" : "false") << '\n'
        << "alpha = " << detail::format_g17(alpha) << '\n'
        << "expansion_size = " << expansion_size << '\n'
        << "refinement_size = " << refinement_size << '\n'
        << "k_max = " << k_max << '\n'
        << "dimensions = " << dimensions << '\n'
        << "epochs = " << epochs << '\n'
        << "learning_rate = " << detail::format_g17(learning_rate) << '\n'
        << "learning_rate_floor = " << detail::format_g17(learning_rate_floor) << '\n'
        << "negatives = " << negatives << '\n'
        << "noise_exponent = " << detail::format_g17(noise_exponent) << '\n'
        << "seed = " << seed << '\n'
        << "threads = " << threads << '\n'
        << "labels = " << labels_path << '\n'
        << "label_fraction = " << detail::format_g17(label_fraction) << '\n'
        << "folds = " << folds << '\n'
        << "l2_lambda = " << detail::format_g17(l2_lambda) << '\n'
        << "out_expanded = " << out_expanded << '\n'
        << "out_refined = " << out_refined << '\n'
        << "out_embedding = " << out_embedding << '\n';
    return out.str();
}

inline TrainConfig train_config_of(const PipelineConfig& cfg) {
    TrainConfig tc;
    tc.dimensions = cfg.dimensions;
    tc.epochs = cfg.epochs;
    tc.learning_rate = cfg.learning_rate;
    tc.learning_rate_floor = cfg.learning_rate_floor;
    tc.negatives = cfg.negatives;
    tc.noise_exponent = cfg.noise_exponent;
    tc.seed = cfg.seed;
    return tc;
}

inline Graph load_graph_file(const PipelineConfig& cfg) {
    auto in = detail::open_input(cfg.graph_path);
    return load_edge_list(in, cfg.weighted).graph;
}

inline LabelSet load_labels_file(const PipelineConfig& cfg, const Graph& g) {
    auto in = detail::open_input(cfg.labels_path);
    return load_labels(in, g);
}

/// Both neighborhood phases for every source, with per-phase wall times.
struct NeighborhoodArtifacts {
    std::vector<ExpandedNeighborhood> expanded;
    std::vector<RefinedNeighborhood> refined;
    double expansion_seconds = 0.0;
    double refinement_seconds = 0.0;
};

inline NeighborhoodArtifacts compute_neighborhoods(const Graph& g, const PipelineConfig& cfg) {
    NeighborhoodArtifacts artifacts;
    detail::Stopwatch expansion_clock;
    artifacts.expanded = expand_all(g, cfg.alpha, cfg.expansion_size, cfg.threads);
    artifacts.expansion_seconds = expansion_clock.seconds();
    detail::Stopwatch refinement_clock;
    artifacts.refined =
        refine_all(g, artifacts.expanded, cfg.alpha, cfg.refinement_size, cfg.k_max, cfg.threads);
    artifacts.refinement_seconds = refinement_clock.seconds();
    return artifacts;
}

/// Full in-memory pipeline: neighborhoods then training.
inline TrainResult run_pipeline(const Graph& g, const PipelineConfig& cfg) {
    NeighborhoodArtifacts artifacts = compute_neighborhoods(g, cfg);
    return train(g.node_count(), artifacts.refined, train_config_of(cfg));
}

inline void echo_config(const PipelineConfig& cfg, std::ostream& out) {
    out << "# resolved configuration\n" << cfg.to_key_values();
}

// ---------------------------------------------------------------------------
// Batch commands. Each returns a process exit code: 0 success, 1 stability or
// internal assertion failure, 2 usage/validation, 3 I/O or input parse error.
// ---------------------------------------------------------------------------

template <typename Fn>
int run_command(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kIo;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kIo;
    } catch (const ReferenceError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kValidation;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kValidation;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kStabilityFailure;
    }
}

/// `neighborhoods`: expansion and refinement dumps plus per-phase timings.
inline int cmd_neighborhoods(const PipelineConfig& cfg, std::ostream& out) {
    return run_command(out, [&] {
        cfg.validate();
        echo_config(cfg, out);
        Graph g = load_graph_file(cfg);
        NeighborhoodArtifacts artifacts = compute_neighborhoods(g, cfg);
        {
            auto dump = detail::open_output(cfg.out_expanded);
            write_expanded_dump(dump, artifacts.expanded, g);
        }
        {
            auto dump = detail::open_output(cfg.out_refined);
            write_refined_dump(dump, artifacts.refined, g);
        }
        out << "nodes\t" << g.node_count() << '\n'
            << "expansion_seconds\t" << detail::format_g9(artifacts.expansion_seconds) << '\n'
            << "refinement_seconds\t" << detail::format_g9(artifacts.refinement_seconds) << '\n'
            << "expanded_file\t" << cfg.out_expanded << '\n'
            << "refined_file\t" << cfg.out_refined << '\n';
        return exit_code::kSuccess;
    });
}

/// `embed`: trains from the refined dump when present, otherwise runs the
/// neighborhood phases in-process; writes the embedding file.
inline int cmd_embed(const PipelineConfig& cfg, std::ostream& out) {
    return run_command(out, [&] {
        cfg.validate();
        echo_config(cfg, out);
        Graph g = load_graph_file(cfg);
        TrainResult result = [&] {
            if (std::filesystem::exists(cfg.out_refined)) {
                out << "refined_source\t" << cfg.out_refined << '\n';
                auto dump = detail::open_input(cfg.out_refined);
                auto refined = read_refined_dump(dump, g);
                return train(g.node_count(), refined, train_config_of(cfg));
            }
            out << "refined_source\tcomputed\n";
            return run_pipeline(g, cfg);
        }();
        {
            auto file = detail::open_output(cfg.out_embedding);
            write_embedding(file, result.embedding, g);
        }
        for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e)
            out << "epoch_mean_loss\t" << e << '\t'
                << detail::format_g9(result.epoch_mean_loss[e]) << '\n';
        if (result.empty_neighborhoods > 0)
            out << "empty_neighborhoods\t" << result.empty_neighborhoods << '\n';
        out << "embedding_file\t" << cfg.out_embedding << '\n';
        return exit_code::kSuccess;
    });
}

namespace detail {

/// Loads an embedding file into a matrix aligned with the graph's node ids.
inline EmbeddingMatrix embedding_from_file(const EmbeddingFile& file, const Graph& g) {
    if (file.names.size() != g.node_count())
        throw std::invalid_argument("embedding file node count does not match the graph");
    EmbeddingMatrix emb(g.node_count(), file.dimensions);
    for (std::size_t i = 0; i < file.names.size(); ++i) {
        auto id = g.id_of(file.names[i]);
        if (!id)
            throw std::invalid_argument("embedding file names a node absent from the graph: '" +
                                        file.names[i] + "'");
        auto row = emb.input_row(*id);
        for (std::size_t j = 0; j < file.dimensions; ++j) row[j] = file.rows[i][j];
    }
    return emb;
}

inline void print_eval_report(const EvalReport& report, std::ostream& out) {
    out << "folds\t" << report.fold_count << '\n'
        << "labeled_fraction\t" << format_g9(report.labeled_fraction) << '\n';
    for (std::size_t f = 0; f < report.fold_micro_f1.size(); ++f)
        out << "fold_micro_f1\t" << f << '\t' << format_g9(report.fold_micro_f1[f]) << '\n';
    out << "mean_micro_f1\t" << format_g9(report.mean_micro_f1) << '\n'
        << "degenerate_label_folds\t" << report.degenerate_label_folds << '\n';
}

}  // namespace detail

/// `evaluate`: multi-label classification report for an existing embedding.
inline int cmd_evaluate(const PipelineConfig& cfg, std::ostream& out) {
    return run_command(out, [&] {
        cfg.validate();
        if (cfg.labels_path.empty() || !std::filesystem::exists(cfg.labels_path))
            throw std::invalid_argument("evaluate requires an existing labels file");
        if (!std::filesystem::exists(cfg.out_embedding))
            throw std::invalid_argument("evaluate requires an existing embedding file");
        echo_config(cfg, out);
        Graph g = load_graph_file(cfg);
        LabelSet labels = load_labels_file(cfg, g);
        auto in = detail::open_input(cfg.out_embedding);
        EmbeddingMatrix emb = detail::embedding_from_file(read_embedding(in), g);
        EvalReport report =
            train_classifier(emb, labels, cfg.l2_lambda, cfg.folds, cfg.label_fraction, cfg.seed);
        detail::print_eval_report(report, out);
        return exit_code::kSuccess;
    });
}

/// `stability`: repeats the full pipeline and verifies the embedding files
/// agree exactly. With vary_seeds the runs use distinct seeds and the
/// deviation is reported informationally instead of enforced.
inline int cmd_stability(const PipelineConfig& cfg, std::size_t runs, bool vary_seeds,
                         std::ostream& out) {
    return run_command(out, [&] {
        cfg.validate();
        if (runs < 2) throw std::invalid_argument("stability requires runs >= 2");
        echo_config(cfg, out);
        Graph g = load_graph_file(cfg);

        std::vector<std::string> files;
        for (std::size_t i = 0; i < runs; ++i) {
            PipelineConfig run_cfg = cfg;
            if (vary_seeds) run_cfg.seed = cfg.seed + i;
            TrainResult result = run_pipeline(g, run_cfg);
            std::string path = cfg.out_embedding + ".run" + std::to_string(i);
            auto file = detail::open_output(path);
            write_embedding(file, result.embedding, g);
            files.push_back(path);
            out << "run\t" << i << "\tseed\t" << run_cfg.seed << "\tfile\t" << path << '\n';
        }

        double global_max = 0.0;
        std::size_t worst_dimension = 0;
        bool bytes_identical = true;
        auto read_bytes = [](const std::string& path) {
            std::ifstream in(path, std::ios::binary);
            std::ostringstream buf;
            buf << in.rdbuf();
            return buf.str();
        };
        std::string first_bytes = read_bytes(files.front());
        for (std::size_t i = 1; i < files.size(); ++i) {
            StabilityReport report = compare_runs(files[0], files[i], 0.0);
            if (report.global_max > global_max) {
                global_max = report.global_max;
                worst_dimension = report.worst_dimension;
            }
            if (read_bytes(files[i]) != first_bytes) bytes_identical = false;
        }
        out << "global_max_deviation\t" << detail::format_g9(global_max) << '\n'
            << "byte_identical\t" << (bytes_identical ? "true" : "false") << '\n';
        if (vary_seeds) {
            out << "stability\tinformational\n";
            return exit_code::kSuccess;
        }
        if (global_max != 0.0 || !bytes_identical) {
            out << "stability\tfail\tworst_dimension\t" << worst_dimension << '\n';
            return exit_code::kStabilityFailure;
        }
        out << "stability\tpass\n";
        return exit_code::kSuccess;
    });
}

/// One sensitivity-sweep row: pipeline plus evaluation at a single value of
/// the swept parameter.
struct SweepRow {
    std::size_t value = 0;
    double mean_micro_f1 = 0.0;
    double seconds = 0.0;
};

/// `sweep`: re-runs the full pipeline per grid value of one parameter and
/// tabulates mean Micro-F1 and wall time. Infeasible points (r > e) are
/// skipped with a notice.
inline int cmd_sweep(const PipelineConfig& cfg, const std::string& param,
                     const std::vector<std::size_t>& grid, std::ostream& out) {
    return run_command(out, [&] {
        if (param != "expansion_size" && param != "refinement_size" && param != "dimensions")
            throw std::invalid_argument(
                "sweep param must be expansion_size, refinement_size, or dimensions");
        if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
        cfg.validate();
        if (cfg.labels_path.empty() || !std::filesystem::exists(cfg.labels_path))
            throw std::invalid_argument("sweep requires an existing labels file");
        echo_config(cfg, out);
        Graph g = load_graph_file(cfg);
        LabelSet labels = load_labels_file(cfg, g);

        out << "param\tvalue\tmean_micro_f1\tseconds\n";
        for (std::size_t value : grid) {
            PipelineConfig point = cfg;
            if (param == "expansion_size") point.expansion_size = value;
            else if (param == "refinement_size") point.refinement_size = value;
            else point.dimensions = value;
            if (point.refinement_size > point.expansion_size) {
                out << "# skipped value=" << value << " reason=refinement_size>expansion_size\n";
                continue;
            }
            point.validate();
            detail::Stopwatch clock;
            TrainResult result = run_pipeline(g, point);
            EvalReport report = train_classifier(result.embedding, labels, point.l2_lambda,
                                                 point.folds, point.label_fraction, point.seed);
            double seconds = clock.seconds();
            out << param << '\t' << value << '\t' << detail::format_g9(report.mean_micro_f1)
                << '\t' << detail::format_g9(seconds) << '\n';
        }
        return exit_code::kSuccess;
    });
}

}  // namespace circuitvec
