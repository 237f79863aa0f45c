#include "frontier/weights.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace frontier {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    }
    return v;
}

std::string payload_bytes(const std::vector<float>& payload) {
    std::string out;
    out.reserve(payload.size() * 4);
    for (float f : payload) {
        const auto bits = std::bit_cast<std::uint32_t>(f);
        for (int i = 0; i < 4; ++i) {
            out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
        }
    }
    return out;
}

}  // namespace

std::uint32_t crc32_of(const void* data, std::size_t size) {
    uLong crc = crc32(0L, Z_NULL, 0);
    const auto* bytes = static_cast<const Bytef*>(data);
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = crc32(crc, bytes, chunk);
        bytes += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

nlohmann::ordered_json config_to_json(const EncoderConfig& c) {
    nlohmann::ordered_json j;
    j["n_max"] = c.n_max;
    j["input_dim"] = c.input_dim;
    j["token_dim"] = c.token_dim;
    j["depth"] = c.depth;
    j["heads"] = c.heads;
    j["head_dim"] = c.head_dim;
    j["ff_dim"] = c.ff_dim;
    j["hidden_activation"] = c.hidden_activation;
    j["output_activation"] = c.output_activation;
    return j;
}

EncoderConfig config_from_json(const nlohmann::json& j) {
    EncoderConfig c;
    c.n_max = j.value("n_max", c.n_max);
    c.input_dim = j.value("input_dim", 12 + c.n_max);
    c.token_dim = j.value("token_dim", c.token_dim);
    c.depth = j.value("depth", c.depth);
    c.heads = j.value("heads", c.heads);
    c.head_dim = j.value("head_dim", c.head_dim);
    c.ff_dim = j.value("ff_dim", c.ff_dim);
    c.hidden_activation = j.value("hidden_activation", c.hidden_activation);
    c.output_activation = j.value("output_activation", c.output_activation);
    c.validate();
    return c;
}

template <typename T>
WeightBundle to_bundle(const Model<T>& model) {
    WeightBundle b;
    b.config = model.config;
    b.tensors = model.layout.tensors();
    b.payload.resize(model.params.size());
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        b.payload[i] = static_cast<float>(model.params[i]);
    }
    return b;
}

template <typename T>
Model<T> from_bundle(const WeightBundle& bundle) {
    Model<T> model(bundle.config);
    const auto& expected = model.layout.tensors();
    if (bundle.tensors.size() != expected.size()) {
        throw WeightFormatError("weight bundle has " + std::to_string(bundle.tensors.size()) + " tensors, config needs " +
                                std::to_string(expected.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& have = bundle.tensors[i];
        const auto& want = expected[i];
        if (have.name != want.name || have.rows != want.rows || have.cols != want.cols || have.offset != want.offset) {
            throw WeightFormatError("tensor '" + have.name + "' does not match expected '" + want.name + "' [" +
                                    std::to_string(want.rows) + "x" + std::to_string(want.cols) + "]");
        }
    }
    if (bundle.payload.size() != model.params.size()) {
        throw WeightFormatError("weight payload has wrong length");
    }
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        model.params[i] = static_cast<T>(bundle.payload[i]);
    }
    return model;
}

template WeightBundle to_bundle<float>(const Model<float>&);
template WeightBundle to_bundle<double>(const Model<double>&);
template Model<float> from_bundle<float>(const WeightBundle&);
template Model<double> from_bundle<double>(const WeightBundle&);

std::string serialize_weights(const WeightBundle& bundle) {
    const std::string payload = payload_bytes(bundle.payload);
    nlohmann::ordered_json manifest;
    manifest["format_version"] = kWeightFormatVersion;
    manifest["dtype"] = "float32";
    manifest["byte_order"] = "little";
    manifest["config"] = config_to_json(bundle.config);
    auto& table = manifest["tensors"] = nlohmann::ordered_json::array();
    for (const auto& t : bundle.tensors) {
        table.push_back({{"name", t.name},
                         {"shape", {t.rows, t.cols}},
                         {"offset", t.offset * 4},
                         {"length", t.size() * 4}});
    }
    manifest["payload_bytes"] = payload.size();
    manifest["checksum"] = {{"algorithm", "crc32"}, {"value", crc32_of(payload.data(), payload.size())}};
    const std::string text = manifest.dump();

    std::string out(kWeightMagic, sizeof(kWeightMagic));
    put_u64(out, text.size());
    out += text;
    out += payload;
    return out;
}

WeightBundle deserialize_weights(const std::string& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kWeightMagic, sizeof(kWeightMagic)) != 0) {
        throw WeightFormatError("not a weight bundle (bad magic)");
    }
    const std::uint64_t manifest_len = get_u64(bytes, 8);
    if (manifest_len > bytes.size() - 16) {
        throw WeightFormatError("truncated weight manifest");
    }
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(bytes.substr(16, manifest_len));
    } catch (const nlohmann::json::exception& e) {
        throw WeightFormatError(std::string("bad weight manifest: ") + e.what());
    }
    if (manifest.value("format_version", 0) != kWeightFormatVersion) {
        throw WeightFormatError("unsupported weight format version");
    }
    if (manifest.value("dtype", "") != "float32") {
        throw WeightFormatError("unsupported dtype '" + manifest.value("dtype", "") + "'");
    }
    const std::size_t start = 16 + manifest_len;
    const auto payload_len = manifest.at("payload_bytes").get<std::size_t>();
    if (bytes.size() - start != payload_len || payload_len % 4 != 0) {
        throw WeightFormatError("weight payload size mismatch");
    }
    const auto want_crc = manifest.at("checksum").at("value").get<std::uint32_t>();
    if (crc32_of(bytes.data() + start, payload_len) != want_crc) {
        throw WeightFormatError("weight payload checksum mismatch");
    }

    WeightBundle b;
    b.config = config_from_json(manifest.at("config"));
    for (const auto& t : manifest.at("tensors")) {
        TensorInfo info;
        info.name = t.at("name").get<std::string>();
        info.rows = t.at("shape").at(0).get<std::size_t>();
        info.cols = t.at("shape").at(1).get<std::size_t>();
        info.offset = t.at("offset").get<std::size_t>() / 4;
        if (t.at("length").get<std::size_t>() != info.size() * 4 || (info.offset + info.size()) * 4 > payload_len) {
            throw WeightFormatError("tensor '" + info.name + "' has inconsistent extent");
        }
        b.tensors.push_back(std::move(info));
    }
    const ParamLayout layout(b.config);
    for (std::size_t i = 0; i < b.tensors.size() && i < layout.tensors().size(); ++i) {
        b.tensors[i].decay = layout.tensors()[i].decay;
    }
    b.payload.resize(payload_len / 4);
    for (std::size_t i = 0; i < b.payload.size(); ++i) {
        std::uint32_t bits = 0;
        for (int k = 0; k < 4; ++k) {
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[start + 4 * i + k])) << (8 * k);
        }
        b.payload[i] = std::bit_cast<float>(bits);
    }
    return b;
}

void save_weights(const WeightBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    const std::string bytes = serialize_weights(bundle);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

WeightBundle load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_weights(ss.str());
}

}  // namespace frontier
