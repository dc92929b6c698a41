#include "mopdil/synthbench.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mopdil {

namespace {

enum class Split : std::uint64_t { Train = 1, TestId = 2, TestOod = 3 };

using Matrix = std::vector<Embedding>;  // row-major, rows[r][c]

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
    return std::mt19937_64(seq);
}

// Modified Gram-Schmidt over a Gaussian matrix; columns of the result are orthonormal.
Matrix random_rotation(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Embedding> cols(dim, Embedding(dim));
    for (auto& c : cols) {
        for (double& x : c) x = normal(rng);
    }
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double proj = dot(cols[i], cols[j]);
            for (std::size_t d = 0; d < dim; ++d) cols[i][d] -= proj * cols[j][d];
        }
        cols[i] = normalized(cols[i]);
    }
    Matrix rot(dim, Embedding(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) rot[r][c] = cols[c][r];
    }
    return rot;
}

Embedding apply(const Matrix& m, EmbeddingView v) {
    Embedding out(m.size(), 0.0);
    for (std::size_t r = 0; r < m.size(); ++r) out[r] = dot(m[r], v);
    return out;
}

std::vector<LabeledSample> draw(const SynthSpec& spec, Split split, const std::vector<Embedding>& means,
                                int domain_label, std::size_t per_class, const std::string& prefix) {
    std::vector<LabeledSample> out;
    out.reserve(per_class * means.size());
    for (std::size_t k = 0; k < means.size(); ++k) {
        // independent of the domain index: domains share noise and differ only in geometry
        auto rng = make_rng(spec.seed, static_cast<std::uint64_t>(split), k);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (std::size_t i = 0; i < per_class; ++i) {
            LabeledSample s;
            s.id = prefix + "_c" + std::to_string(k) + "_" + std::to_string(i);
            s.domain_id = domain_label;
            s.class_id = static_cast<int>(k);
            s.embedding = means[k];
            for (double& x : s.embedding) x += spec.cluster_sigma * noise(rng);
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace

void SynthSpec::validate() const {
    if (dimension == 0 || num_domains == 0 || num_classes == 0 || train_per_class == 0 || test_per_class == 0) {
        throw Error(ErrorCode::InvalidArgument, "synthetic spec counts must be at least 1");
    }
    if (!(cluster_sigma >= 0.0) || !(class_separation > 0.0) || !(domain_shift >= 0.0) ||
        !std::isfinite(cluster_sigma + class_separation + domain_shift)) {
        throw Error(ErrorCode::InvalidArgument, "synthetic spec spreads must be finite and non-negative");
    }
    if (!std::isfinite(domain_rotation)) throw Error(ErrorCode::InvalidArgument, "domain_rotation must be finite");
    if (domain_rotation != 0.0 && dimension <= num_classes + num_classes % 2) {
        throw Error(ErrorCode::InfeasibleGeometry,
                    "a class-layout rotation needs dimension above the rotated coordinate pairs");
    }
    if (dimension < num_classes) {
        throw Error(ErrorCode::InfeasibleGeometry, "dimension " + std::to_string(dimension) + " cannot hold " +
                                                       std::to_string(num_classes) + " separated class means");
    }
}

SynthStream generate_stream(const SynthSpec& spec) {
    spec.validate();
    const std::size_t dim = spec.dimension;
    auto rng = make_rng(spec.seed, 0, 0);
    const Matrix rotation = random_rotation(dim, rng);

    std::normal_distribution<double> normal(0.0, 1.0);
    // with a class-layout rotation the shift direction avoids the rotated planes,
    // keeping cross-domain displacement >= domain_shift
    const std::size_t planes_end = spec.domain_rotation == 0.0 ? 0 : spec.num_classes + spec.num_classes % 2;
    Embedding direction(dim, 0.0);
    for (std::size_t d = planes_end; d < dim; ++d) direction[d] = normal(rng);
    direction = normalized(direction);

    // pairwise distance between a*e_i and a*e_j is class_separation
    const double axis = spec.class_separation / std::sqrt(2.0);
    const std::size_t total_domains = spec.num_domains + spec.num_ood_domains;

    SynthStream stream;
    stream.class_means.resize(total_domains);
    for (std::size_t s = 0; s < total_domains; ++s) {
        for (std::size_t k = 0; k < spec.num_classes; ++k) {
            Embedding base(dim, 0.0);
            // rotate the class axis inside its coordinate pair (2i, 2i+1)
            const double angle = spec.domain_rotation * static_cast<double>(s);
            const std::size_t pair = k - k % 2;
            if (k % 2 == 0) {
                base[pair] = axis * std::cos(angle);
                if (pair + 1 < dim) base[pair + 1] = axis * std::sin(angle);
            } else {
                base[pair] = -axis * std::sin(angle);
                base[k] = axis * std::cos(angle);
            }
            for (std::size_t d = 0; d < dim; ++d) base[d] += spec.domain_shift * static_cast<double>(s) * direction[d];
            stream.class_means[s].push_back(apply(rotation, base));
        }
    }

    for (std::size_t s = 0; s < spec.num_domains; ++s) {
        const auto label = static_cast<int>(s);
        const std::string tag = "d" + std::to_string(s);
        stream.domains.push_back(DomainSplit{
            draw(spec, Split::Train, stream.class_means[s], label, spec.train_per_class, tag + "_train"),
            draw(spec, Split::TestId, stream.class_means[s], label, spec.test_per_class, tag + "_test"),
        });
    }
    for (std::size_t m = 0; m < spec.num_ood_domains; ++m) {
        auto ood = draw(spec, Split::TestOod, stream.class_means[spec.num_domains + m], -1, spec.test_per_class,
                        "ood" + std::to_string(m));
        stream.test_ood.insert(stream.test_ood.end(), ood.begin(), ood.end());
    }
    return stream;
}

EvalSummary evaluate(const FittedMixture& mixture, const std::vector<LabeledSample>& samples) {
    EvalSummary out;
    out.count = samples.size();
    if (samples.empty()) return out;
    std::size_t correct = 0;
    std::size_t gated_in = 0;
    std::size_t routed = 0;
    std::size_t known = 0;
    for (const auto& s : samples) {
        const Prediction p = infer(s.embedding, mixture);
        if (s.class_id >= 0 && p.argmax() == static_cast<std::size_t>(s.class_id)) ++correct;
        if (p.routing.is_in_distribution) ++gated_in;
        if (s.domain_id >= 0) {
            ++known;
            if (p.routing.selected_domain == static_cast<std::size_t>(s.domain_id)) ++routed;
        }
    }
    const auto n = static_cast<double>(samples.size());
    out.accuracy = static_cast<double>(correct) / n;
    out.gate_id_fraction = static_cast<double>(gated_in) / n;
    out.routing_accuracy = known == 0 ? 0.0 : static_cast<double>(routed) / static_cast<double>(known);
    return out;
}

FittedMixture fit_stream(const SynthStream& stream, const SynthSpec& spec, const InferenceConfig& config) {
    FittedMixture mixture(spec.dimension, spec.num_classes, config);
    for (const auto& d : stream.domains) mixture.append(fit_domain(d.train, spec.num_classes, config));
    return mixture;
}

ExperimentReport run_experiment(const SynthSpec& spec, const InferenceConfig& config) {
    config.validate();
    const SynthStream stream = generate_stream(spec);
    const std::size_t n = spec.num_domains;

    ExperimentReport report;
    report.spec = spec;
    report.config = config;
    report.accuracy_matrix = AccuracyMatrix(n);

    std::vector<LabeledSample> all_id;
    for (const auto& d : stream.domains) all_id.insert(all_id.end(), d.test_id.begin(), d.test_id.end());

    FittedMixture mixture(spec.dimension, spec.num_classes, config);
    for (std::size_t step = 0; step < n; ++step) {
        mixture.append(fit_domain(stream.domains[step].train, spec.num_classes, config));
        for (std::size_t i = 0; i < n; ++i) {
            report.accuracy_matrix.set(i, step, evaluate(mixture, stream.domains[i].test_id).accuracy);
        }
        const EvalSummary all = evaluate(mixture, all_id);
        report.gate_id_fraction_per_step.push_back(all.gate_id_fraction);
        if (step + 1 == n) report.final_id_routing_accuracy = all.routing_accuracy;
    }

    report.aa = average_accuracy(report.accuracy_matrix);
    if (n >= 2) {
        report.af = average_forgetting(report.accuracy_matrix);
        report.ca = cumulative_unseen_accuracy(report.accuracy_matrix);
    }
    report.final_ood_accuracy = evaluate(mixture, stream.test_ood).accuracy;
    return report;
}

std::vector<SweepRow> sweep_q(const FittedMixture& mixture, const std::vector<LabeledSample>& test_id,
                              const std::vector<LabeledSample>& test_ood, const std::vector<double>& q_values) {
    if (q_values.empty()) throw Error(ErrorCode::InvalidArgument, "q sweep needs at least one value");
    std::vector<SweepRow> rows;
    rows.reserve(q_values.size());
    for (double q : q_values) {
        FittedMixture at_q = mixture;
        at_q.config.q = q;
        at_q.config.validate();
        const EvalSummary id = evaluate(at_q, test_id);
        const EvalSummary ood = evaluate(at_q, test_ood);
        SweepRow row;
        row.q = q;
        row.id_accuracy = id.accuracy;
        row.ood_accuracy = ood.accuracy;
        const double total = static_cast<double>(id.count + ood.count);
        row.gate_id_fraction =
            total == 0.0 ? 0.0
                         : (id.gate_id_fraction * static_cast<double>(id.count) +
                            ood.gate_id_fraction * static_cast<double>(ood.count)) / total;
        rows.push_back(row);
    }
    return rows;
}

std::vector<SweepRow> sweep_q(const SynthSpec& spec, const InferenceConfig& config,
                              const std::vector<double>& q_values) {
    const SynthStream stream = generate_stream(spec);
    const FittedMixture mixture = fit_stream(stream, spec, config);
    std::vector<LabeledSample> all_id;
    for (const auto& d : stream.domains) all_id.insert(all_id.end(), d.test_id.begin(), d.test_id.end());
    return sweep_q(mixture, all_id, stream.test_ood, q_values);
}

std::vector<AblationRow> ablation_grid(const FittedMixture& mixture, const std::vector<LabeledSample>& test_id,
                                       const std::vector<LabeledSample>& test_ood,
                                       const std::vector<EnsembleMode>& modes,
                                       const std::vector<DistanceMode>& distances) {
    std::vector<AblationRow> rows;
    for (EnsembleMode mode : modes) {
        for (DistanceMode distance : distances) {
            FittedMixture variant = mixture;
            variant.config.ensemble_mode = mode;
            variant.config.distance_mode = distance;
            AblationRow row;
            row.mode = mode;
            row.distance = distance;
            row.id_accuracy = evaluate(variant, test_id).accuracy;
            if (test_ood.empty()) {
                row.average = row.id_accuracy;
            } else {
                row.ood_accuracy = evaluate(variant, test_ood).accuracy;
                row.average = 0.5 * (row.id_accuracy + row.ood_accuracy);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

const std::vector<EnsembleMode>& all_ensemble_modes() {
    static const std::vector<EnsembleMode> modes{EnsembleMode::AlwaysSingle, EnsembleMode::AlwaysEnsemble,
                                                 EnsembleMode::Hybrid};
    return modes;
}

const std::vector<DistanceMode>& all_distance_modes() {
    static const std::vector<DistanceMode> modes{DistanceMode::Uniform, DistanceMode::L1, DistanceMode::L2,
                                                 DistanceMode::MahalanobisDiag, DistanceMode::L2Gmm};
    return modes;
}

}  // namespace mopdil
