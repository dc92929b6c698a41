#include "mopdil/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mopdil/cli_io.hpp"
#include "mopdil/log.hpp"

namespace mopdil {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigFlags {
    std::optional<double> q;
    std::optional<std::string> distance;
    std::optional<std::string> mode;
    std::optional<double> temperature;
    std::optional<double> sigma_floor;
    bool normalize = false;

    void attach(CLI::App& app) {
        app.add_option("--q", q, "OOD gate threshold in (0, 1)");
        app.add_option("--distance", distance, "mixture-weight kernel")
            ->check(CLI::IsMember({"l1", "l2", "maha", "uniform", "l2gmm"}));
        app.add_option("--mode", mode, "ensemble mode")->check(CLI::IsMember({"hybrid", "single", "ensemble"}));
        app.add_option("--temperature", temperature, "softmax temperature");
        app.add_option("--sigma-floor", sigma_floor, "lower bound on fitted standard deviations");
        app.add_flag("--normalize", normalize, "project embeddings to unit L2 norm at ingestion");
    }

    void apply(InferenceConfig& c) const {
        if (q) c.q = *q;
        if (distance) c.distance_mode = parse_distance_mode(*distance);
        if (mode) c.ensemble_mode = parse_ensemble_mode(*mode);
        if (temperature) c.temperature = *temperature;
        if (sigma_floor) c.sigma_floor = *sigma_floor;
        if (normalize) c.normalize_embeddings = true;
        c.validate();
    }
};

template <typename T>
std::vector<T> parse_list(const std::vector<std::string>& names, T (*parse)(std::string_view)) {
    std::vector<T> out;
    for (const auto& n : names) out.push_back(parse(n));
    return out;
}

void emit(const std::string& text, const std::optional<std::string>& out_path, std::ostream& out) {
    if (out_path) {
        write_file_atomic(*out_path, text);
    } else {
        out << text;
    }
}

std::string format_prediction_rows(const std::vector<LabeledSample>& samples, const FittedMixture& mixture) {
    const bool with_weights = mixture.config.ensemble_mode != EnsembleMode::AlwaysSingle;
    std::ostringstream os;
    os << "id,selected_domain,is_id,cdf,argmax_class";
    for (std::size_t k = 0; k < mixture.num_classes(); ++k) os << ",p" << k;
    if (with_weights) {
        for (std::size_t s = 0; s < mixture.size(); ++s) os << ",w" << s;
    }
    os << '\n';
    for (const auto& sample : samples) {
        const Prediction p = infer(sample.embedding, mixture);
        os << sample.id << ',' << p.routing.selected_domain << ',' << (p.routing.is_in_distribution ? 1 : 0) << ','
           << format_real(p.routing.cdf_value) << ',' << p.argmax();
        for (double prob : p.posterior.probs) os << ',' << format_real(prob);
        if (with_weights) {
            for (std::size_t s = 0; s < mixture.size(); ++s) {
                os << ',';
                if (p.weights) os << format_real(p.weights->weights[s]);
            }
        }
        os << '\n';
        if (p.weights && p.weights->fallback_uniform) {
            log::info("sample '" + sample.id + "': all mixture log-weights were -inf, used uniform weights");
        }
    }
    return os.str();
}

void split_id_ood(const std::vector<LabeledSample>& samples, std::vector<LabeledSample>& id,
                  std::vector<LabeledSample>& ood) {
    for (const auto& s : samples) {
        if (s.class_id < 0) throw Error(ErrorCode::IndexOutOfRange, "sample '" + s.id + "' has no class label");
        (s.domain_id >= 0 ? id : ood).push_back(s);
    }
}

struct Workload {
    FittedMixture mixture;
    std::vector<LabeledSample> test_id;
    std::vector<LabeledSample> test_ood;
};

// Either a synthetic spec (fitted with the configured flags) or a model plus labeled embeddings.
Workload load_workload(const std::optional<std::string>& spec_path, const std::optional<std::string>& model_path,
                       const std::optional<std::string>& embeddings_path, std::optional<std::uint64_t> seed,
                       const ConfigFlags& flags) {
    if (spec_path) {
        SynthSpec spec = load_synth_spec(*spec_path);
        if (seed) spec.seed = *seed;
        InferenceConfig config;
        flags.apply(config);
        SynthStream stream = generate_stream(spec);
        Workload w{fit_stream(stream, spec, config), {}, std::move(stream.test_ood)};
        for (auto& d : stream.domains) w.test_id.insert(w.test_id.end(), d.test_id.begin(), d.test_id.end());
        return w;
    }
    if (!model_path || !embeddings_path) throw UsageError("give either --spec or both --model and --embeddings");
    Workload w{load_model(*model_path), {}, {}};
    flags.apply(w.mixture.config);
    const auto samples = load_embeddings(*embeddings_path, {w.mixture.dimension(), w.mixture.size(),
                                                            w.mixture.num_classes()});
    split_id_ood(samples, w.test_id, w.test_ood);
    return w;
}

int run_fit(const std::string& embeddings_path, const std::string& model_path,
            const std::optional<std::string>& out_path, std::optional<int> domain_filter,
            std::optional<std::size_t> classes, std::optional<std::size_t> kmeans_k, std::uint64_t seed,
            std::size_t max_iters, const ConfigFlags& flags) {
    std::optional<FittedMixture> mixture;
    if (fs::exists(model_path)) {
        mixture = load_model(model_path);
        flags.apply(mixture->config);
    }

    EmbeddingBounds bounds;
    if (mixture) {
        bounds.dimension = mixture->dimension();
        bounds.num_classes = mixture->num_classes();
    } else if (classes) {
        bounds.num_classes = *classes;
    }
    auto samples = load_embeddings(embeddings_path, bounds);
    if (domain_filter) {
        std::erase_if(samples, [&](const LabeledSample& s) { return s.domain_id != *domain_filter; });
    }
    if (samples.empty()) throw Error(ErrorCode::MissingClass, "no samples to fit");
    std::set<int> domains;
    for (const auto& s : samples) domains.insert(s.domain_id);
    if (domains.size() != 1) throw UsageError("embeddings span several domains; select one with --domain");

    if (!mixture) {
        std::size_t k = classes.value_or(0);
        if (!classes) {
            for (const auto& s : samples) k = std::max<std::size_t>(k, static_cast<std::size_t>(s.class_id + 1));
        }
        InferenceConfig config;
        flags.apply(config);
        mixture.emplace(samples.front().embedding.size(), k, config);
    }

    const int domain = *domains.begin();
    if (domain >= 0 && static_cast<std::size_t>(domain) < mixture->size()) {
        throw Error(ErrorCode::DuplicateDomain, "domain " + std::to_string(domain) + " is already in " + model_path);
    }
    DomainModel model = kmeans_k ? fit_domain_kmeans(samples, *kmeans_k, seed, mixture->config, max_iters)
                                 : fit_domain(samples, mixture->num_classes(), mixture->config);
    mixture->append(std::move(model));
    save_model(*mixture, out_path.value_or(model_path));
    log::info("fitted domain " + std::to_string(domain) + " from " + std::to_string(samples.size()) + " samples");
    return kExitOk;
}

std::string report_json(const AccuracyMatrix& m, double aa, std::optional<double> af, std::optional<double> ca,
                        std::optional<double> ood_accuracy) {
    nlohmann::json j;
    j["accuracy_matrix"] = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t s = 0; s < m.size(); ++s) {
            const auto v = m.get(i, s);
            row.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
        }
        j["accuracy_matrix"].push_back(std::move(row));
    }
    j["aa"] = aa;
    j["af"] = af ? nlohmann::json(*af) : nlohmann::json(nullptr);
    j["ca"] = ca ? nlohmann::json(*ca) : nlohmann::json(nullptr);
    if (ood_accuracy) j["ood_accuracy"] = *ood_accuracy;
    return j.dump(2) + "\n";
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prototype routing and mixture ensembling for domain-incremental inference", "mopdil"};
    app.require_subcommand(1);

    std::optional<std::string> model, embeddings, out_path, spec_path;
    std::optional<std::uint64_t> seed;
    ConfigFlags flags;

    auto* fit = app.add_subcommand("fit", "append one domain fitted from labeled embeddings");
    std::optional<int> domain_filter;
    std::optional<std::size_t> classes, kmeans_k;
    std::size_t max_iters = 100;
    fit->add_option("--embeddings", embeddings, "labeled embedding CSV")->required();
    fit->add_option("--model", model, "model file; created if absent, appended otherwise")->required();
    fit->add_option("--out", out_path, "write the updated model here instead of --model");
    fit->add_option("--domain", domain_filter, "fit only rows of this domain");
    fit->add_option("--classes", classes, "number of classes K (default: inferred)");
    fit->add_option("--kmeans", kmeans_k, "use k K-Means centroids as prototypes (routing-only ablation)");
    fit->add_option("--max-iters", max_iters, "K-Means iteration cap");
    fit->add_option("--seed", seed, "K-Means seed");
    flags.attach(*fit);

    auto* infer_cmd = app.add_subcommand("infer", "per-sample predictions with routing trace");
    infer_cmd->add_option("--model", model)->required();
    infer_cmd->add_option("--embeddings", embeddings)->required();
    infer_cmd->add_option("--out", out_path);
    flags.attach(*infer_cmd);

    auto* eval = app.add_subcommand("eval", "accuracy matrix and AA/AF/CA");
    eval->add_option("--model", model);
    eval->add_option("--embeddings", embeddings);
    eval->add_option("--spec", spec_path, "run the sequential protocol on a synthetic spec");
    eval->add_option("--seed", seed);
    eval->add_option("--out", out_path);
    flags.attach(*eval);

    std::vector<std::string> mode_names{"single", "ensemble", "hybrid"};
    std::vector<std::string> distance_names{"uniform", "l1", "l2", "maha", "l2gmm"};
    auto* ablate = app.add_subcommand("ablate", "ensemble-mode x distance comparison grid");
    ablate->add_option("--model", model);
    ablate->add_option("--embeddings", embeddings);
    ablate->add_option("--spec", spec_path);
    ablate->add_option("--seed", seed);
    ablate->add_option("--out", out_path);
    ablate->add_option("--modes", mode_names)->delimiter(',');
    ablate->add_option("--distances", distance_names)->delimiter(',');
    flags.attach(*ablate);

    std::vector<double> q_values{0.5, 0.7, 0.9, 0.94, 0.99};
    auto* sweep = app.add_subcommand("sweep-q", "ID/OOD accuracy and gate fraction across q");
    sweep->add_option("--model", model);
    sweep->add_option("--embeddings", embeddings);
    sweep->add_option("--spec", spec_path);
    sweep->add_option("--seed", seed);
    sweep->add_option("--out", out_path);
    sweep->add_option("--q-values", q_values)->delimiter(',');
    flags.attach(*sweep);

    auto* synth = app.add_subcommand("synth", "write a synthetic stream as embedding files");
    std::string out_dir;
    synth->add_option("--spec", spec_path)->required();
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--seed", seed);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (fit->parsed()) {
            return run_fit(*embeddings, *model, out_path, domain_filter, classes, kmeans_k, seed.value_or(0),
                           max_iters, flags);
        }
        if (infer_cmd->parsed()) {
            FittedMixture mixture = load_model(*model);
            flags.apply(mixture.config);
            const auto samples = load_embeddings(*embeddings, {mixture.dimension(), std::nullopt,
                                                               mixture.num_classes()});
            emit(format_prediction_rows(samples, mixture), out_path, out);
            return kExitOk;
        }
        if (eval->parsed()) {
            if (spec_path) {
                SynthSpec spec = load_synth_spec(*spec_path);
                if (seed) spec.seed = *seed;
                InferenceConfig config;
                flags.apply(config);
                const auto r = run_experiment(spec, config);
                emit(report_json(r.accuracy_matrix, r.aa, r.af, r.ca, r.final_ood_accuracy), out_path, out);
                return kExitOk;
            }
            if (!model || !embeddings) throw UsageError("eval needs --spec or both --model and --embeddings");
            FittedMixture mixture = load_model(*model);
            flags.apply(mixture.config);
            const auto samples = load_embeddings(*embeddings, {mixture.dimension(), mixture.size(),
                                                               mixture.num_classes()});
            std::vector<LabeledSample> id, ood;
            split_id_ood(samples, id, ood);
            const std::size_t n = mixture.size();
            std::vector<std::vector<LabeledSample>> by_domain(n);
            for (auto& s : id) by_domain[static_cast<std::size_t>(s.domain_id)].push_back(s);
            AccuracyMatrix m(n);
            // the mixture is append-only, so its prefixes are the models after each step
            for (std::size_t step = 0; step < n; ++step) {
                const FittedMixture at_step = mixture.prefix(step + 1);
                for (std::size_t i = 0; i < n; ++i) {
                    if (!by_domain[i].empty()) m.set(i, step, evaluate(at_step, by_domain[i]).accuracy);
                }
            }
            const double aa = average_accuracy(m);
            std::optional<double> af, ca;
            if (n >= 2) {
                af = average_forgetting(m);
                ca = cumulative_unseen_accuracy(m);
            }
            std::optional<double> ood_acc;
            if (!ood.empty()) ood_acc = evaluate(mixture, ood).accuracy;
            emit(report_json(m, aa, af, ca, ood_acc), out_path, out);
            return kExitOk;
        }
        if (ablate->parsed()) {
            const Workload w = load_workload(spec_path, model, embeddings, seed, flags);
            const auto rows = ablation_grid(w.mixture, w.test_id, w.test_ood,
                                            parse_list(mode_names, &parse_ensemble_mode),
                                            parse_list(distance_names, &parse_distance_mode));
            std::ostringstream os;
            os << "mode,distance,id_accuracy,ood_accuracy,average\n";
            for (const auto& r : rows) {
                os << to_string(r.mode) << ',' << to_string(r.distance) << ',' << format_real(r.id_accuracy) << ','
                   << (w.test_ood.empty() ? std::string() : format_real(r.ood_accuracy)) << ','
                   << format_real(r.average) << '\n';
            }
            emit(os.str(), out_path, out);
            return kExitOk;
        }
        if (sweep->parsed()) {
            const Workload w = load_workload(spec_path, model, embeddings, seed, flags);
            const auto rows = sweep_q(w.mixture, w.test_id, w.test_ood, q_values);
            std::ostringstream os;
            os << "q,id_accuracy,ood_accuracy,gate_id_fraction\n";
            for (const auto& r : rows) {
                os << format_real(r.q) << ',' << format_real(r.id_accuracy) << ',' << format_real(r.ood_accuracy)
                   << ',' << format_real(r.gate_id_fraction) << '\n';
            }
            emit(os.str(), out_path, out);
            return kExitOk;
        }
        if (synth->parsed()) {
            SynthSpec spec = load_synth_spec(*spec_path);
            if (seed) spec.seed = *seed;
            const SynthStream stream = generate_stream(spec);
            fs::create_directories(out_dir);
            const fs::path dir(out_dir);
            std::vector<LabeledSample> test_id;
            for (std::size_t s = 0; s < stream.domains.size(); ++s) {
                save_embeddings(stream.domains[s].train, dir / ("train_" + std::to_string(s) + ".csv"));
                test_id.insert(test_id.end(), stream.domains[s].test_id.begin(), stream.domains[s].test_id.end());
            }
            save_embeddings(test_id, dir / "test_id.csv");
            if (!stream.test_ood.empty()) save_embeddings(stream.test_ood, dir / "test_ood.csv");
            write_file_atomic(dir / "spec.json", serialize_synth_spec(spec));
            log::info("wrote " + std::to_string(stream.domains.size()) + " domains to " + out_dir);
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace mopdil
