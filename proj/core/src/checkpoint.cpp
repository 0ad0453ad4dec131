#include "anomorph/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

#include "anomorph/errors.hpp"

namespace anomorph {

namespace {

using nlohmann::json;

constexpr char kMagic[5] = {'M', 'R', 'P', 'H', '1'};

struct Blob {
    std::string name;
    const NdArray* array;
};

// Parameter values first, then their optimizer moments.
std::vector<Blob> enumerate_blobs(ModelSet& m) {
    std::vector<Blob> blobs;
    for (Parameter* p : m.all_params()) {
        blobs.push_back({p->name, &p->node->value});
        blobs.push_back({p->name + ".adam_m", &p->adam_m});
        blobs.push_back({p->name + ".adam_v", &p->adam_v});
    }
    return blobs;
}

json arch_to_json(const ArchConfig& c) {
    return json{{"levels", c.levels},
                {"base_channels", c.base_channels},
                {"latent_channels", c.latent_channels},
                {"slope", c.slope},
                {"disc_levels", c.disc_levels},
                {"disc_base", c.disc_base},
                {"deformer_hidden", c.deformer_hidden}};
}

ArchConfig arch_from_json(const json& j) {
    ArchConfig c;
    c.levels = j.at("levels").get<int>();
    c.base_channels = j.at("base_channels").get<int>();
    c.latent_channels = j.at("latent_channels").get<int>();
    c.slope = j.at("slope").get<float>();
    c.disc_levels = j.at("disc_levels").get<int>();
    c.disc_base = j.at("disc_base").get<int>();
    c.deformer_hidden = j.at("deformer_hidden").get<int>();
    return c;
}

} // namespace

void save_checkpoint(const std::string& path, ModelSet& models,
                     const CheckpointMeta& meta) {
    auto blobs = enumerate_blobs(models);

    json table = json::array();
    long offset = 0;
    for (const auto& b : blobs) {
        table.push_back(
            {{"name", b.name}, {"shape", b.array->shape()}, {"offset", offset}});
        offset += b.array->size() * 4;
    }
    json j;
    j["format"] = "MRPH1";
    j["arch"] = arch_to_json(models.cfg);
    j["entries"] = std::move(table);
    j["meta"] = {{"adam_steps", meta.adam_steps},
                 {"stage", meta.stage},
                 {"beta_constrained", models.deformer_constrained.beta},
                 {"beta_unconstrained", models.deformer_unconstrained.beta}};
    const std::string payload_json = j.dump();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
    f.write(kMagic, 5);
    f.put('\n');
    const uint64_t len = payload_json.size();
    f.write(reinterpret_cast<const char*>(&len), 8);
    f.write(payload_json.data(), (std::streamsize)payload_json.size());
    for (const auto& b : blobs)
        f.write(reinterpret_cast<const char*>(b.array->data()),
                (std::streamsize)b.array->size() * 4);
    if (!f) throw std::runtime_error("write failed: " + path);
}

ModelSet load_checkpoint(const std::string& path, CheckpointMeta* meta) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open checkpoint: " + path);
    char magic[6] = {};
    f.read(magic, 6);
    if (!f || std::memcmp(magic, kMagic, 5) != 0 || magic[5] != '\n')
        throw validation_error("not a checkpoint file (bad magic): " + path);
    uint64_t len = 0;
    f.read(reinterpret_cast<char*>(&len), 8);
    if (!f || len == 0 || len > (1ull << 31))
        throw validation_error("corrupt checkpoint header: " + path);
    std::string payload_json((size_t)len, '\0');
    f.read(payload_json.data(), (std::streamsize)len);
    if (!f) throw validation_error("truncated checkpoint table: " + path);

    json j;
    try {
        j = json::parse(payload_json);
    } catch (const json::parse_error& e) {
        throw validation_error("bad checkpoint JSON: " + std::string(e.what()));
    }
    const ArchConfig arch = arch_from_json(j.at("arch"));
    const float bc = j.at("meta").at("beta_constrained").get<float>();
    const float bu = j.at("meta").at("beta_unconstrained").get<float>();
    ModelSet m = build_models(arch, 0, bc, bu);

    std::map<std::string, std::pair<std::vector<int>, long>> table;
    for (const auto& e : j.at("entries"))
        table[e.at("name").get<std::string>()] = {e.at("shape").get<std::vector<int>>(),
                                                  e.at("offset").get<long>()};

    const std::streampos payload_start = f.tellg();
    auto read_into = [&](const std::string& name, NdArray& dst) {
        auto it = table.find(name);
        if (it == table.end())
            throw validation_error("checkpoint missing tensor '" + name + "': " + path);
        if (it->second.first != dst.shape())
            throw validation_error("checkpoint shape mismatch for '" + name + "'");
        f.seekg(payload_start + (std::streampos)it->second.second);
        f.read(reinterpret_cast<char*>(dst.data()), (std::streamsize)dst.size() * 4);
        if (!f) throw validation_error("truncated checkpoint payload at '" + name + "'");
    };
    for (Parameter* p : m.all_params()) {
        read_into(p->name, p->node->value);
        read_into(p->name + ".adam_m", p->adam_m);
        read_into(p->name + ".adam_v", p->adam_v);
    }

    if (meta) {
        meta->adam_steps.clear();
        const auto& jm = j.at("meta");
        if (jm.contains("adam_steps"))
            for (auto it = jm["adam_steps"].begin(); it != jm["adam_steps"].end(); ++it)
                meta->adam_steps[it.key()] = it.value().get<long>();
        meta->stage = jm.value("stage", 0);
    }
    return m;
}

uint64_t params_digest(const std::vector<Parameter*>& params) {
    uint64_t h = 1469598103934665603ull;
    for (const Parameter* p : params) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(p->node->value.data());
        const long n = p->node->value.size() * 4;
        for (long i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    }
    return h;
}

} // namespace anomorph
