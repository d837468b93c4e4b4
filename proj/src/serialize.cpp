#include "uqkit/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <openssl/evp.h>

#include "uqkit/error.hpp"

namespace uqkit {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw DataError(std::string("state file: missing field '") + key + "'");
    return j.at(key);
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const json::exception&) {
        throw DataError(std::string("state file: field '") + key + "' has the wrong type");
    }
}

ojson array_to_json(std::span<const double> v) { return ojson{{"count", v.size()}, {"data", encode_doubles(v)}}; }

std::vector<double> array_from_json(const json& j, const char* key, std::size_t expected) {
    const json& a = field(j, key);
    const auto count = get<std::size_t>(a, "count");
    if (count != expected)
        throw DataError(std::string("state file: '") + key + "' holds " + std::to_string(count) + " values, expected " +
                        std::to_string(expected));
    return decode_doubles(get<std::string>(a, "data"), count);
}

} // namespace

std::string encode_doubles(std::span<const double> values) {
    std::vector<unsigned char> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
    }
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(len));
    return out;
}

std::vector<double> decode_doubles(const std::string& text, std::size_t count) {
    if (text.size() != 4 * ((count * 8 + 2) / 3)) throw DataError("state file: base64 payload has the wrong length");
    std::vector<unsigned char> bytes(text.size() / 4 * 3 + 1);
    const int len = EVP_DecodeBlock(bytes.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                    static_cast<int>(text.size()));
    if (len < 0 || static_cast<std::size_t>(len) < count * 8) throw DataError("state file: malformed base64 payload");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(b)]) << (8 * b);
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

ojson model_to_json(const MlpConfig& cfg) {
    ojson j;
    j["input_dim"] = cfg.input_dim;
    j["hidden_widths"] = cfg.hidden_widths;
    j["output_dim"] = cfg.output_dim;
    j["activation"] = std::string(to_string(cfg.activation));
    j["head"] = std::string(to_string(cfg.head));
    j["noise_variance"] = cfg.noise_variance;
    j["init_seed"] = cfg.init_seed;
    return j;
}

MlpConfig model_from_json(const json& j) {
    MlpConfig cfg;
    cfg.input_dim = get<std::size_t>(j, "input_dim");
    cfg.hidden_widths = get<std::vector<std::size_t>>(j, "hidden_widths");
    cfg.output_dim = get<std::size_t>(j, "output_dim");
    try {
        cfg.activation = parse_activation(get<std::string>(j, "activation"));
        cfg.head = parse_head(get<std::string>(j, "head"));
        cfg.noise_variance = get<double>(j, "noise_variance");
        cfg.init_seed = get<std::uint64_t>(j, "init_seed");
        cfg.validate();
    } catch (const InvalidInput& e) {
        throw DataError(std::string("state file: ") + e.what());
    }
    return cfg;
}

ojson state_to_json(const SavedPosterior& saved) {
    ojson j;
    j["format"] = state_format_version;
    j["method"] = std::string(method_name(saved.state));
    j["model"] = model_to_json(saved.model);
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MapState>) {
                j["theta"] = array_to_json(s.theta);
            } else if constexpr (std::is_same_v<T, EnsembleState>) {
                ojson members = ojson::array();
                for (const auto& m : s.members) members.push_back(array_to_json(m));
                j["members"] = members;
            } else if constexpr (std::is_same_v<T, SwagState>) {
                j["rank"] = s.rank;
                j["snapshots"] = s.snapshots;
                j["mean"] = array_to_json(s.mean);
                j["diag_second_moment"] = array_to_json(s.diag_second_moment);
                j["deviations"] = array_to_json(s.deviations.flat());
            } else if constexpr (std::is_same_v<T, LaplaceState>) {
                j["mode"] = array_to_json(s.mode);
                j["diag_precision"] = array_to_json(s.diag_precision);
            } else {
                j["mean"] = array_to_json(s.mean);
                j["log_std"] = array_to_json(s.log_std);
            }
        },
        saved.state);
    return j;
}

SavedPosterior state_from_json(const json& j) {
    const int format = get<int>(j, "format");
    if (format != state_format_version)
        throw DataError("state file: unsupported format " + std::to_string(format));
    SavedPosterior saved{model_from_json(field(j, "model")), MapState{}};
    const std::size_t p = saved.model.param_count();
    const auto method = get<std::string>(j, "method");
    if (method == "map") {
        saved.state = MapState{array_from_json(j, "theta", p)};
    } else if (method == "ensemble") {
        const json& members = field(j, "members");
        if (!members.is_array() || members.size() < 2) throw DataError("state file: ensemble needs at least 2 members");
        EnsembleState s;
        for (const auto& m : members) {
            const json wrapped{{"member", m}};
            s.members.push_back(array_from_json(wrapped, "member", p));
        }
        saved.state = std::move(s);
    } else if (method == "swag") {
        SwagState s;
        s.rank = get<std::size_t>(j, "rank");
        s.snapshots = get<std::size_t>(j, "snapshots");
        if (s.rank < 1 || s.snapshots < s.rank) throw DataError("state file: SWAG needs 1 <= rank <= snapshots");
        s.mean = array_from_json(j, "mean", p);
        s.diag_second_moment = array_from_json(j, "diag_second_moment", p);
        s.deviations = Matrix(p, s.rank, array_from_json(j, "deviations", p * s.rank));
        saved.state = std::move(s);
    } else if (method == "laplace") {
        LaplaceState s{array_from_json(j, "mode", p), array_from_json(j, "diag_precision", p)};
        for (double v : s.diag_precision)
            if (!(v > 0.0)) throw DataError("state file: Laplace precision must be positive");
        saved.state = std::move(s);
    } else if (method == "advi") {
        saved.state = AdviState{array_from_json(j, "mean", p), array_from_json(j, "log_std", p)};
    } else {
        throw DataError("state file: unknown method '" + method + "'");
    }
    return saved;
}

void save_state(const std::filesystem::path& path, const SavedPosterior& saved) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << state_to_json(saved).dump(2) << '\n';
}

SavedPosterior load_state(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return state_from_json(j);
}

} // namespace uqkit
