#include "egir/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace egir {

namespace {

using ordered_json = nlohmann::ordered_json;
using Code = FormatError::Code;

constexpr char kMagic[4] = {'E', 'G', 'I', 'R'};

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

void put_u64le(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get_u32le(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint64_t get_u64le(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

ordered_json attr_to_json(const Attribute& attr) {
    ordered_json j;
    if (std::holds_alternative<int64_t>(attr)) {
        j["type"] = "int";
        j["value"] = std::get<int64_t>(attr);
    } else if (std::holds_alternative<double>(attr)) {
        double v = std::get<double>(attr);
        if (!std::isfinite(v)) {
            throw FormatError(Code::BadManifest, "non-finite float attribute cannot be serialized");
        }
        j["type"] = "float";
        j["value"] = v;
    } else if (std::holds_alternative<std::vector<int64_t>>(attr)) {
        j["type"] = "ints";
        j["value"] = std::get<std::vector<int64_t>>(attr);
    } else {
        j["type"] = "string";
        j["value"] = std::get<std::string>(attr);
    }
    return j;
}

Attribute attr_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("type") || !j.contains("value")) {
        throw FormatError(Code::BadManifest, "attribute entry must carry type and value");
    }
    const std::string type = j.at("type").get<std::string>();
    const ordered_json& v = j.at("value");
    if (type == "int") {
        if (!v.is_number_integer()) throw FormatError(Code::BadManifest, "int attribute not integral");
        return v.get<int64_t>();
    }
    if (type == "float") {
        if (!v.is_number()) throw FormatError(Code::BadManifest, "float attribute not numeric");
        return v.get<double>();
    }
    if (type == "ints") {
        if (!v.is_array()) throw FormatError(Code::BadManifest, "ints attribute not an array");
        return v.get<std::vector<int64_t>>();
    }
    if (type == "string") {
        if (!v.is_string()) throw FormatError(Code::BadManifest, "string attribute not a string");
        return v.get<std::string>();
    }
    throw FormatError(Code::BadManifest, "unknown attribute type '" + type + "'");
}

std::string dtype_tag(Dtype dt) { return dt == Dtype::F32 ? "f32" : "f64"; }

Dtype dtype_from_tag(const std::string& tag) {
    if (tag == "f32") return Dtype::F32;
    if (tag == "f64") return Dtype::F64;
    throw FormatError(Code::BadManifest, "unknown dtype tag '" + tag + "'");
}

} // namespace

std::vector<uint8_t> serialize(const ModelGraph& model) {
    require_valid(model, "serialize");

    ordered_json manifest;
    manifest["version"] = model.version;

    ordered_json inputs = ordered_json::array();
    for (const ValueInfo& in : model.inputs) {
        ordered_json j;
        j["name"] = in.name;
        j["dims"] = in.dims;
        j["batched"] = in.batched;
        j["dtype"] = dtype_tag(in.dtype);
        inputs.push_back(std::move(j));
    }
    manifest["inputs"] = std::move(inputs);
    manifest["outputs"] = model.outputs;

    ordered_json nodes = ordered_json::array();
    for (const GraphNode& node : model.nodes) {
        ordered_json j;
        j["op_type"] = node.op_type;
        j["inputs"] = node.inputs;
        j["outputs"] = node.outputs;
        ordered_json attrs = ordered_json::object();
        for (const auto& [key, attr] : node.attrs) {
            attrs[key] = attr_to_json(attr);
        }
        j["attrs"] = std::move(attrs);
        nodes.push_back(std::move(j));
    }
    manifest["nodes"] = std::move(nodes);

    // Initializers pack contiguously in name order (std::map iteration),
    // which keeps serialization deterministic.
    ordered_json inits = ordered_json::array();
    uint64_t offset = 0;
    for (const auto& [name, tensor] : model.initializers) {
        ordered_json j;
        j["name"] = name;
        j["dims"] = tensor.shape();
        uint64_t nbytes = static_cast<uint64_t>(tensor.numel()) * 4;
        j["offset"] = offset;
        j["nbytes"] = nbytes;
        inits.push_back(std::move(j));
        offset += nbytes;
    }
    manifest["initializers"] = std::move(inits);
    manifest["metadata"] = model.metadata;

    std::string manifest_str = manifest.dump();

    std::vector<uint8_t> out;
    out.reserve(16 + manifest_str.size() + offset);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32le(out, model.version);
    put_u64le(out, manifest_str.size());
    out.insert(out.end(), manifest_str.begin(), manifest_str.end());

    for (const auto& [name, tensor] : model.initializers) {
        for (float v : tensor.f32()) {
            put_u32le(out, std::bit_cast<uint32_t>(v));
        }
    }
    return out;
}

ModelGraph deserialize(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError(Code::BadMagic, "not an .egir model (bad magic)");
    }
    uint32_t version = get_u32le(bytes.data() + 4);
    if (version != kFormatVersion) {
        throw FormatError(Code::UnsupportedVersion,
                          "unsupported format version " + std::to_string(version));
    }
    uint64_t manifest_len = get_u64le(bytes.data() + 8);
    if (16 + manifest_len > bytes.size()) {
        throw FormatError(Code::TruncatedManifest, "manifest extends past end of file");
    }

    ordered_json manifest;
    try {
        manifest = ordered_json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<long>(manifest_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(Code::BadManifest, std::string("manifest is not valid JSON: ") + e.what());
    }

    const uint8_t* region = bytes.data() + 16 + manifest_len;
    const uint64_t region_size = bytes.size() - 16 - manifest_len;

    ModelGraph model;
    try {
        if (!manifest.contains("version")) {
            throw FormatError(Code::BadManifest, "manifest missing mandatory version field");
        }
        model.version = manifest.at("version").get<uint32_t>();
        if (model.version != version) {
            throw FormatError(Code::BadManifest, "manifest version disagrees with header");
        }

        for (const ordered_json& j : manifest.at("inputs")) {
            ValueInfo in;
            in.name = j.at("name").get<std::string>();
            in.dims = j.at("dims").get<std::vector<int64_t>>();
            in.batched = j.at("batched").get<bool>();
            in.dtype = dtype_from_tag(j.at("dtype").get<std::string>());
            model.inputs.push_back(std::move(in));
        }
        model.outputs = manifest.at("outputs").get<std::vector<std::string>>();

        for (const ordered_json& j : manifest.at("nodes")) {
            GraphNode node;
            node.op_type = j.at("op_type").get<std::string>();
            node.inputs = j.at("inputs").get<std::vector<std::string>>();
            node.outputs = j.at("outputs").get<std::vector<std::string>>();
            for (const auto& [key, value] : j.at("attrs").items()) {
                node.attrs.emplace(key, attr_from_json(value));
            }
            model.nodes.push_back(std::move(node));
        }

        for (const ordered_json& j : manifest.at("initializers")) {
            std::string name = j.at("name").get<std::string>();
            std::vector<int64_t> dims = j.at("dims").get<std::vector<int64_t>>();
            uint64_t offset = j.at("offset").get<uint64_t>();
            uint64_t nbytes = j.at("nbytes").get<uint64_t>();

            uint64_t expected = static_cast<uint64_t>(shape_numel(dims)) * 4;
            if (nbytes != expected) {
                throw FormatError(Code::OffsetInconsistency,
                                  "initializer '" + name + "' declares " + std::to_string(nbytes) +
                                  " bytes but shape " + shape_str(dims) + " needs " +
                                  std::to_string(expected));
            }
            if (offset + nbytes > region_size || offset + nbytes < offset) {
                throw FormatError(Code::TruncatedTensorRegion,
                                  "initializer '" + name + "' data extends past end of tensor region");
            }

            std::vector<float> data(static_cast<size_t>(nbytes / 4));
            for (size_t i = 0; i < data.size(); ++i) {
                data[i] = std::bit_cast<float>(get_u32le(region + offset + 4 * i));
            }
            try {
                model.initializers.emplace(std::move(name),
                                           Tensor::from_f32(std::move(dims), std::move(data)));
            } catch (const NumericError&) {
                throw FormatError(Code::BadManifest, "initializer carries non-finite values");
            }
        }

        if (manifest.contains("metadata")) {
            model.metadata = manifest.at("metadata").get<std::map<std::string, std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(Code::BadManifest, std::string("malformed manifest: ") + e.what());
    }

    return model;
}

void save_model(const ModelGraph& model, const std::string& path) {
    std::vector<uint8_t> bytes = serialize(model);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError(Code::Io, "cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw FormatError(Code::Io, "short write to '" + path + "'");
}

ModelGraph load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError(Code::Io, "cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

} // namespace egir
