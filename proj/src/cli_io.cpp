#include "mopdil/cli_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace mopdil {

namespace {

using nlohmann::json;

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& reason) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + reason);
}

int parse_index(std::string_view field, std::size_t line, const char* what) {
    field = trim(field);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        parse_fail(line, std::string("bad ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

double parse_coordinate(std::string_view field, std::size_t line) {
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        parse_fail(line, "bad coordinate '" + std::string(field) + "'");
    }
    if (!std::isfinite(value)) parse_fail(line, "non-finite coordinate");
    return value;
}

void check_bound(int value, const std::optional<std::size_t>& bound, std::size_t line, const char* what) {
    if (value < -1 || (bound && value >= 0 && static_cast<std::size_t>(value) >= *bound)) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "line " + std::to_string(line) + ": " + what + " " + std::to_string(value) + " out of range");
    }
}

json reals(const Embedding& v) {
    json out = json::array();
    for (double x : v) out.push_back(format_real(x));
    return out;
}

Embedding reals_from(const json& j) {
    Embedding out;
    out.reserve(j.size());
    for (const auto& x : j) out.push_back(parse_real(x.get<std::string>()));
    return out;
}

json config_to_json(const InferenceConfig& c) {
    return json{{"q", format_real(c.q)},
                {"distance_mode", std::string(to_string(c.distance_mode))},
                {"ensemble_mode", std::string(to_string(c.ensemble_mode))},
                {"temperature", format_real(c.temperature)},
                {"normalize_embeddings", c.normalize_embeddings},
                {"sigma_floor", format_real(c.sigma_floor)}};
}

InferenceConfig config_from_json(const json& j) {
    InferenceConfig c;
    c.q = parse_real(j.at("q").get<std::string>());
    c.distance_mode = parse_distance_mode(j.at("distance_mode").get<std::string>());
    c.ensemble_mode = parse_ensemble_mode(j.at("ensemble_mode").get<std::string>());
    c.temperature = parse_real(j.at("temperature").get<std::string>());
    c.normalize_embeddings = j.at("normalize_embeddings").get<bool>();
    c.sigma_floor = parse_real(j.at("sigma_floor").get<std::string>());
    c.validate();
    return c;
}

}  // namespace

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

double parse_real(const std::string& text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorCode::ParseError, "bad real '" + text + "'");
    }
    return value;
}

std::vector<LabeledSample> parse_embeddings(const std::string& text, const EmbeddingBounds& bounds) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;

    if (!std::getline(in, raw)) throw Error(ErrorCode::ParseError, "line 1: missing header");
    ++line_no;
    const auto header = split_fields(trim(raw));
    if (header.size() < 4 || trim(header[0]) != "id" || trim(header[1]) != "domain" || trim(header[2]) != "class") {
        parse_fail(line_no, "header must be id,domain,class,d0,...");
    }
    const std::size_t dim = header.size() - 3;
    for (std::size_t d = 0; d < dim; ++d) {
        if (trim(header[3 + d]) != "d" + std::to_string(d)) parse_fail(line_no, "expected column d" + std::to_string(d));
    }
    if (bounds.dimension && *bounds.dimension != dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "file has dimension " + std::to_string(dim) + ", expected " + std::to_string(*bounds.dimension));
    }

    std::vector<LabeledSample> samples;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 3 + dim) {
            parse_fail(line_no, "expected " + std::to_string(3 + dim) + " fields, found " + std::to_string(fields.size()));
        }
        LabeledSample s;
        s.id = std::string(trim(fields[0]));
        s.domain_id = parse_index(fields[1], line_no, "domain");
        s.class_id = parse_index(fields[2], line_no, "class");
        check_bound(s.domain_id, bounds.num_domains, line_no, "domain");
        check_bound(s.class_id, bounds.num_classes, line_no, "class");
        s.embedding.reserve(dim);
        for (std::size_t d = 0; d < dim; ++d) s.embedding.push_back(parse_coordinate(fields[3 + d], line_no));
        samples.push_back(std::move(s));
    }
    return samples;
}

std::vector<LabeledSample> load_embeddings(const std::filesystem::path& path, const EmbeddingBounds& bounds) {
    return parse_embeddings(read_file(path), bounds);
}

std::string format_embeddings(const std::vector<LabeledSample>& samples) {
    if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "cannot infer a dimension from zero samples");
    const std::size_t dim = samples.front().embedding.size();
    std::string out = "id,domain,class";
    for (std::size_t d = 0; d < dim; ++d) out += ",d" + std::to_string(d);
    out += '\n';
    for (const auto& s : samples) {
        if (s.embedding.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged samples");
        out += s.id + ',' + std::to_string(s.domain_id) + ',' + std::to_string(s.class_id);
        for (double x : s.embedding) out += ',' + format_real(x);
        out += '\n';
    }
    return out;
}

void save_embeddings(const std::vector<LabeledSample>& samples, const std::filesystem::path& path) {
    write_file_atomic(path, format_embeddings(samples));
}

std::string serialize_model(const FittedMixture& mixture) {
    if (mixture.empty()) throw Error(ErrorCode::EmptyMixture, "refusing to save a model with no domains");
    json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["dimension"] = mixture.dimension();
    doc["num_classes"] = mixture.num_classes();
    doc["config"] = config_to_json(mixture.config);
    json domains = json::array();
    for (const auto& d : mixture.domains()) {
        json jd;
        jd["domain_id"] = d.domain_id;
        jd["prototype_kind"] = d.kind == PrototypeKind::KMeans ? "kmeans" : "class_means";
        jd["prototypes"] = json::array();
        jd["class_heads"] = json::array();
        jd["diag_variance"] = json::array();
        jd["gaussians"] = json::array();
        for (const auto& p : d.prototypes) jd["prototypes"].push_back(reals(p));
        for (const auto& h : d.class_heads) jd["class_heads"].push_back(reals(h));
        for (const auto& v : d.diag_variance) jd["diag_variance"].push_back(reals(v));
        for (const auto& g : d.gaussians) {
            jd["gaussians"].push_back(json{{"mu", format_real(g.mu)}, {"sigma", format_real(g.sigma)}, {"n", g.n}});
        }
        domains.push_back(std::move(jd));
    }
    doc["domains"] = std::move(domains);
    return doc.dump(2) + "\n";
}

FittedMixture deserialize_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("model file: ") + e.what());
    }
    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kModelSchemaVersion) {
            throw Error(ErrorCode::SchemaVersionMismatch, "model schema_version " + std::to_string(version) +
                                                              ", supported " + std::to_string(kModelSchemaVersion));
        }
        FittedMixture mixture(doc.at("dimension").get<std::size_t>(), doc.at("num_classes").get<std::size_t>(),
                              config_from_json(doc.at("config")));
        for (const auto& jd : doc.at("domains")) {
            DomainModel d;
            d.domain_id = jd.at("domain_id").get<int>();
            const auto kind = jd.at("prototype_kind").get<std::string>();
            if (kind == "kmeans") {
                d.kind = PrototypeKind::KMeans;
            } else if (kind == "class_means") {
                d.kind = PrototypeKind::ClassMeans;
            } else {
                throw Error(ErrorCode::ParseError, "unknown prototype_kind '" + kind + "'");
            }
            for (const auto& p : jd.at("prototypes")) d.prototypes.push_back(reals_from(p));
            for (const auto& h : jd.at("class_heads")) d.class_heads.push_back(reals_from(h));
            for (const auto& v : jd.at("diag_variance")) d.diag_variance.push_back(reals_from(v));
            for (const auto& g : jd.at("gaussians")) {
                d.gaussians.push_back(ClassGaussian{parse_real(g.at("mu").get<std::string>()),
                                                    parse_real(g.at("sigma").get<std::string>()),
                                                    g.at("n").get<std::int64_t>()});
            }
            mixture.append(std::move(d));
        }
        if (mixture.empty()) throw Error(ErrorCode::EmptyMixture, "model file has no domains");
        return mixture;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("model file: ") + e.what());
    }
}

void save_model(const FittedMixture& mixture, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_model(mixture));
}

FittedMixture load_model(const std::filesystem::path& path) {
    return deserialize_model(read_file(path));
}

SynthSpec parse_synth_spec(const std::string& text) {
    SynthSpec spec;
    try {
        const json j = json::parse(text);
        // absent keys keep their defaults
        auto count = [&](const char* key, std::size_t& field) {
            if (j.contains(key)) field = j.at(key).get<std::size_t>();
        };
        auto real = [&](const char* key, double& field) {
            if (j.contains(key)) field = j.at(key).get<double>();
        };
        count("dimension", spec.dimension);
        count("num_domains", spec.num_domains);
        count("num_classes", spec.num_classes);
        count("train_per_class", spec.train_per_class);
        count("test_per_class", spec.test_per_class);
        count("num_ood_domains", spec.num_ood_domains);
        real("cluster_sigma", spec.cluster_sigma);
        real("class_separation", spec.class_separation);
        real("domain_shift", spec.domain_shift);
        real("domain_rotation", spec.domain_rotation);
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("synth spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
    return parse_synth_spec(read_file(path));
}

std::string serialize_synth_spec(const SynthSpec& spec) {
    const json j{{"dimension", spec.dimension},
                 {"num_domains", spec.num_domains},
                 {"num_classes", spec.num_classes},
                 {"train_per_class", spec.train_per_class},
                 {"test_per_class", spec.test_per_class},
                 {"num_ood_domains", spec.num_ood_domains},
                 {"cluster_sigma", spec.cluster_sigma},
                 {"class_separation", spec.class_separation},
                 {"domain_shift", spec.domain_shift},
                 {"domain_rotation", spec.domain_rotation},
                 {"seed", spec.seed}};
    return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot rename onto " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace mopdil
