#include "dtwc/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace dtwc {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    put_u64(out, std::bit_cast<std::uint64_t>(d));
}

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size())
            throw Error(ErrorCode::truncated_payload,
                        "need " + std::to_string(n) + " bytes at offset " + std::to_string(pos) +
                            ", file has " + std::to_string(bytes.size()));
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
        pos += n;
        return s;
    }
};

} // namespace

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::naive_bayes: return "nb";
        case ModelKind::logistic: return "logreg";
        case ModelKind::svm: return "svm";
        case ModelKind::encoder: return "encoder";
    }
    return "?";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "nb") return ModelKind::naive_bayes;
    if (name == "logreg") return ModelKind::logistic;
    if (name == "svm") return ModelKind::svm;
    if (name == "encoder") return ModelKind::encoder;
    throw Error(ErrorCode::invalid_model_kind, "unknown model kind '" + name + "'");
}

std::size_t TensorSection::element_count() const {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

bool ModelContainer::has_section(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return true;
    return false;
}

const TensorSection& ModelContainer::section(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return s;
    throw Error(ErrorCode::usage, "container has no section '" + name + "'");
}

std::uint64_t fnv1a_hash(const std::vector<std::string>& tokens) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    for (const auto& tok : tokens) {
        for (unsigned char c : tok) mix(c);
        mix('\n');
    }
    return h;
}

std::string fnv1a_hex(const std::vector<std::string>& tokens) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a_hash(tokens);
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

std::vector<std::uint8_t> serialize_container(const ModelContainer& container) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kContainerMagic, kContainerMagic + 4);
    put_u32(out, container.version);
    put_u32(out, static_cast<std::uint32_t>(container.kind));

    const std::string meta = container.metadata.dump();
    put_u64(out, meta.size());
    out.insert(out.end(), meta.begin(), meta.end());

    put_u32(out, static_cast<std::uint32_t>(container.sections.size()));
    for (const auto& s : container.sections) {
        if (s.data.size() != s.element_count())
            throw Error(ErrorCode::shape_mismatch,
                        "section '" + s.name + "' holds " + std::to_string(s.data.size()) +
                            " values but its shape needs " + std::to_string(s.element_count()));
        put_u32(out, static_cast<std::uint32_t>(s.name.size()));
        out.insert(out.end(), s.name.begin(), s.name.end());
        put_u32(out, static_cast<std::uint32_t>(s.dims.size()));
        for (std::size_t d : s.dims) put_u64(out, d);
        for (double v : s.data) put_f64(out, v);
    }
    return out;
}

ModelContainer deserialize_container(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0)
        throw Error(ErrorCode::bad_magic, "file does not start with the DTWC magic");

    Reader r{bytes, 4};
    ModelContainer c;
    c.version = r.u32();
    if (c.version != kContainerVersion)
        throw Error(ErrorCode::version_unsupported,
                    "container version " + std::to_string(c.version) + ", expected " +
                        std::to_string(kContainerVersion));

    const std::uint32_t kind_raw = r.u32();
    if (kind_raw > static_cast<std::uint32_t>(ModelKind::encoder))
        throw Error(ErrorCode::invalid_model_kind,
                    "model kind field " + std::to_string(kind_raw));
    c.kind = static_cast<ModelKind>(kind_raw);

    const std::uint64_t meta_len = r.u64();
    const std::string meta = r.str(meta_len);
    c.metadata = nlohmann::ordered_json::parse(meta, nullptr, false);
    if (c.metadata.is_discarded())
        throw Error(ErrorCode::io_failure, "container metadata is not valid JSON");

    const std::uint32_t n_sections = r.u32();
    c.sections.reserve(n_sections);
    for (std::uint32_t i = 0; i < n_sections; ++i) {
        TensorSection s;
        s.name = r.str(r.u32());
        const std::uint32_t ndims = r.u32();
        s.dims.resize(ndims);
        for (std::uint32_t d = 0; d < ndims; ++d) s.dims[d] = r.u64();
        const std::size_t count = s.element_count();
        r.need(count * 8);
        s.data.resize(count);
        for (std::size_t v = 0; v < count; ++v) s.data[v] = r.f64();
        c.sections.push_back(std::move(s));
    }

    // Vocabulary drift check: recompute the hash over the stored tokens.
    if (c.metadata.contains("vocab_hash") && c.metadata.contains("vocab") &&
        c.metadata["vocab"].contains("tokens")) {
        std::vector<std::string> tokens;
        for (const auto& t : c.metadata["vocab"]["tokens"]) tokens.push_back(t.get<std::string>());
        c.vocab_mismatch = fnv1a_hex(tokens) != c.metadata["vocab_hash"].get<std::string>();
    }
    return c;
}

void save_container(const std::string& path, const ModelContainer& container) {
    const auto bytes = serialize_container(container);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_failure, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io_failure, "write failed on '" + path + "'");
}

ModelContainer load_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::io_failure, "read error on '" + path + "'");
    return deserialize_container(bytes);
}

} // namespace dtwc
