#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtwc/error.hpp"

namespace dtwc {

inline constexpr char kContainerMagic[4] = {'D', 'T', 'W', 'C'};
inline constexpr std::uint32_t kContainerVersion = 1;

enum class ModelKind : std::uint32_t {
    naive_bayes = 0,
    logistic = 1,
    svm = 2,
    encoder = 3,
};

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name); // throws InvalidModelKind

struct TensorSection {
    std::string name;
    std::vector<std::size_t> dims;
    std::vector<double> data; // prod(dims) doubles

    std::size_t element_count() const;
};

// On-disk model: magic, version, kind, JSON metadata, then named f64 tensor
// sections with explicit shapes. Everything is little-endian; writing the
// same model twice yields byte-identical files.
struct ModelContainer {
    std::uint32_t version = kContainerVersion;
    ModelKind kind = ModelKind::naive_bayes;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
    std::vector<TensorSection> sections;
    bool vocab_mismatch = false; // set on load when the vocab hash disagrees

    bool has_section(const std::string& name) const;
    const TensorSection& section(const std::string& name) const; // throws Usage
};

// FNV-1a over the tokens joined with '\n'; stored in metadata as 16 hex
// digits so a reload can detect vocabulary drift.
std::uint64_t fnv1a_hash(const std::vector<std::string>& tokens);
std::string fnv1a_hex(const std::vector<std::string>& tokens);

std::vector<std::uint8_t> serialize_container(const ModelContainer& container);
ModelContainer deserialize_container(const std::vector<std::uint8_t>& bytes);

void save_container(const std::string& path, const ModelContainer& container);
ModelContainer load_container(const std::string& path);

} // namespace dtwc
