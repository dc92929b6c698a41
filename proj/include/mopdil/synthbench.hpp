#pragma once

// Synthetic domain streams of Gaussian class clusters and the sequential
// fit-then-evaluate protocol run over them.

#include <cstdint>
#include <optional>
#include <vector>

#include "mopdil/ensembler.hpp"
#include "mopdil/metrics.hpp"

namespace mopdil {

// Defaults are artifact choices, not values taken from any benchmark.
struct SynthSpec {
    std::size_t dimension = 8;
    std::size_t num_domains = 3;
    std::size_t num_classes = 2;
    std::size_t train_per_class = 50;
    std::size_t test_per_class = 50;
    std::size_t num_ood_domains = 1;
    double cluster_sigma = 0.05;
    double class_separation = 10.0;
    double domain_shift = 10.0;
    // Radians per domain index by which each class axis turns within its coordinate
    // pair; zero keeps every domain a pure translate of domain 0.
    double domain_rotation = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DomainSplit {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test_id;
};

struct SynthStream {
    std::vector<DomainSplit> domains;
    // Held-out domains never fitted; samples carry domain_id = -1.
    std::vector<LabeledSample> test_ood;
    // True class means, [domain][class], fitted domains first then held-out ones.
    std::vector<std::vector<Embedding>> class_means;
};

// Class means sit on scaled coordinate axes, domains are displaced along a seeded
// direction, and everything is rotated by one seeded orthogonal matrix. Noise
// draws depend on (seed, split, class, index) only, so domains differ purely by
// geometry; with domain_shift = 0 all domains are identical.
SynthStream generate_stream(const SynthSpec& spec);

struct EvalSummary {
    std::size_t count = 0;
    double accuracy = 0.0;             // argmax == class_id
    double gate_id_fraction = 0.0;     // is_in_distribution
    double routing_accuracy = 0.0;     // selected_domain == domain_id, over samples with a known domain
};

EvalSummary evaluate(const FittedMixture& mixture, const std::vector<LabeledSample>& samples);

struct ExperimentReport {
    AccuracyMatrix accuracy_matrix;
    std::vector<double> gate_id_fraction_per_step;
    double aa = 0.0;
    std::optional<double> af;
    std::optional<double> ca;
    double final_id_routing_accuracy = 0.0;
    double final_ood_accuracy = 0.0;
    SynthSpec spec;
    InferenceConfig config;
};

// Appends domains in stream order and after every step evaluates each domain's
// test_id split, seen or not.
ExperimentReport run_experiment(const SynthSpec& spec, const InferenceConfig& config);

// Fits every domain of the stream into one mixture.
FittedMixture fit_stream(const SynthStream& stream, const SynthSpec& spec, const InferenceConfig& config);

struct SweepRow {
    double q = 0.0;
    double id_accuracy = 0.0;
    double ood_accuracy = 0.0;
    double gate_id_fraction = 0.0;  // over test_id and test_ood together
};

std::vector<SweepRow> sweep_q(const FittedMixture& mixture, const std::vector<LabeledSample>& test_id,
                              const std::vector<LabeledSample>& test_ood, const std::vector<double>& q_values);
std::vector<SweepRow> sweep_q(const SynthSpec& spec, const InferenceConfig& config,
                              const std::vector<double>& q_values);

struct AblationRow {
    EnsembleMode mode = EnsembleMode::Hybrid;
    DistanceMode distance = DistanceMode::L2Gmm;
    double id_accuracy = 0.0;
    double ood_accuracy = 0.0;
    double average = 0.0;  // mean of the two; equals id_accuracy when there is no OOD data
};

std::vector<AblationRow> ablation_grid(const FittedMixture& mixture, const std::vector<LabeledSample>& test_id,
                                       const std::vector<LabeledSample>& test_ood,
                                       const std::vector<EnsembleMode>& modes,
                                       const std::vector<DistanceMode>& distances);

const std::vector<EnsembleMode>& all_ensemble_modes();
const std::vector<DistanceMode>& all_distance_modes();

}  // namespace mopdil
