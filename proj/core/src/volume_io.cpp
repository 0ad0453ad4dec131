#include "anomorph/volume_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "anomorph/errors.hpp"

namespace anomorph {

namespace {

using nlohmann::json;

std::string base_path(const std::string& path) {
    const std::string ext = ".f32raw";
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
        return path.substr(0, path.size() - ext.size());
    return path;
}

json read_sidecar(const std::string& base) {
    std::ifstream js(base + ".json");
    if (!js) throw validation_error("cannot open sidecar: " + base + ".json");
    json j;
    try {
        js >> j;
    } catch (const json::parse_error& e) {
        throw validation_error("bad sidecar JSON in " + base + ".json: " + e.what());
    }
    return j;
}

} // namespace

void save_raw_with_sidecar(const NdArray& a, const std::string& path,
                           const std::map<std::string, std::string>& extra_json) {
    if (!a.all_finite()) throw validation_error("save: non-finite values in " + path);
    const std::string base = base_path(path);

    json j;
    j["shape"] = a.shape();
    for (const auto& [k, v] : extra_json) j[k] = json::parse(v);
    std::ofstream js(base + ".json", std::ios::trunc);
    if (!js) throw std::runtime_error("cannot write sidecar: " + base + ".json");
    js << j.dump(2) << "\n";
    if (!js) throw std::runtime_error("write failed: " + base + ".json");

    std::ofstream raw(base + ".f32raw", std::ios::binary | std::ios::trunc);
    if (!raw) throw std::runtime_error("cannot write payload: " + base + ".f32raw");
    raw.write(reinterpret_cast<const char*>(a.data()), (std::streamsize)a.size() * 4);
    if (!raw) throw std::runtime_error("write failed: " + base + ".f32raw");
}

NdArray load_raw_with_sidecar(const std::string& path,
                              std::map<std::string, std::string>* fields_json) {
    const std::string base = base_path(path);
    json j = read_sidecar(base);
    if (!j.contains("shape") || !j["shape"].is_array())
        throw validation_error("sidecar missing shape: " + base + ".json");
    std::vector<int> shape = j["shape"].get<std::vector<int>>();

    NdArray a(shape);
    std::ifstream raw(base + ".f32raw", std::ios::binary | std::ios::ate);
    if (!raw) throw validation_error("cannot open payload: " + base + ".f32raw");
    const auto bytes = (long)raw.tellg();
    if (bytes != a.size() * 4)
        throw validation_error("payload size mismatch: " + base + ".f32raw holds " +
                               std::to_string(bytes) + " bytes, sidecar shape " +
                               a.shape_str() + " needs " + std::to_string(a.size() * 4));
    raw.seekg(0);
    raw.read(reinterpret_cast<char*>(a.data()), (std::streamsize)a.size() * 4);
    if (!raw) throw std::runtime_error("read failed: " + base + ".f32raw");
    if (!a.all_finite()) throw validation_error("non-finite values in " + base + ".f32raw");

    if (fields_json) {
        fields_json->clear();
        for (auto it = j.begin(); it != j.end(); ++it)
            if (it.key() != "shape") (*fields_json)[it.key()] = it.value().dump();
    }
    return a;
}

void save_volume(const Volume& v, const std::string& path) {
    save_raw_with_sidecar(v.data, path,
                          {{"spacing", nlohmann::json(v.spacing).dump()}});
}

Volume load_raw_volume(const std::string& path) {
    std::map<std::string, std::string> fields;
    NdArray a = load_raw_with_sidecar(path, &fields);
    if (a.rank() != 3)
        throw validation_error("volume must be rank 3, got " + a.shape_str() + ": " + path);
    std::array<float, 3> spacing{1.f, 1.f, 1.f};
    if (auto it = fields.find("spacing"); it != fields.end()) {
        auto sp = nlohmann::json::parse(it->second).get<std::vector<float>>();
        if (sp.size() != 3) throw validation_error("spacing must have 3 entries: " + path);
        spacing = {sp[0], sp[1], sp[2]};
    }
    return Volume(std::move(a), spacing);
}

void save_region_mask(const RegionMask& m, const std::string& path) {
    m.validate();
    NdArray a(m.shape);
    for (long i = 0; i < a.size(); ++i) a.data()[i] = (float)m.labels[i];
    nlohmann::json legend;
    for (const auto& [k, name] : m.legend) legend[std::to_string(k)] = name;
    save_raw_with_sidecar(a, path,
                          {{"kind", "\"region_mask\""}, {"legend", legend.dump()}});
}

RegionMask load_region_mask(const std::string& path) {
    std::map<std::string, std::string> fields;
    NdArray a = load_raw_with_sidecar(path, &fields);
    if (a.rank() != 3)
        throw validation_error("region mask must be rank 3, got " + a.shape_str());
    RegionMask m;
    m.shape = a.shape();
    m.labels.resize((size_t)a.size());
    for (long i = 0; i < a.size(); ++i) {
        const float v = a.data()[i];
        const auto l = (int32_t)std::lround((double)v);
        if ((float)l != v)
            throw validation_error("region mask holds non-integer label value");
        m.labels[(size_t)i] = l;
    }
    if (auto it = fields.find("legend"); it != fields.end()) {
        auto legend = nlohmann::json::parse(it->second);
        for (auto jt = legend.begin(); jt != legend.end(); ++jt)
            m.legend[std::stoi(jt.key())] = jt.value().get<std::string>();
    }
    m.validate();
    return m;
}

Volume normalize_intensity(const Volume& v, double lo_pct, double hi_pct) {
    if (!(0.0 <= lo_pct && lo_pct < hi_pct && hi_pct <= 100.0))
        throw validation_error("normalize_intensity: need 0 <= lo < hi <= 100");
    const long n = v.data.size();
    std::vector<float> sorted(v.data.data(), v.data.data() + n);
    std::sort(sorted.begin(), sorted.end());

    auto pct = [&](double p) {
        const double rank = p / 100.0 * (double)(n - 1);
        const long lo = (long)rank;
        const long hi = std::min(lo + 1, n - 1);
        const double f = rank - (double)lo;
        return (1.0 - f) * sorted[(size_t)lo] + f * sorted[(size_t)hi];
    };
    const double plo = pct(lo_pct);
    const double phi = pct(hi_pct);
    if (!(phi > plo))
        throw validation_error("normalize_intensity: degenerate intensity range");

    Volume out;
    out.spacing = v.spacing;
    out.data = NdArray(v.data.shape());
    const float* in = v.data.data();
    float* o = out.data.data();
    const float scale = (float)(1.0 / (phi - plo));
    const float off = (float)plo;
#pragma omp simd
    for (long i = 0; i < n; ++i) {
        float x = (in[i] - off) * scale;
        o[i] = x < 0.0f ? 0.0f : (x > 1.0f ? 1.0f : x);
    }
    return out;
}

} // namespace anomorph
