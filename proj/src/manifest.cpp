#include "roomeq/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "roomeq/common.hpp"
#include "roomeq/rng.hpp"

namespace fs = std::filesystem;

namespace roomeq {

std::string to_string(EntryKind kind) {
    switch (kind) {
        case EntryKind::Speech: return "speech";
        case EntryKind::Ir: return "ir";
        case EntryKind::Noise: return "noise";
    }
    return "ir";
}

EntryKind entry_kind_from_string(const std::string& s) {
    if (s == "speech") return EntryKind::Speech;
    if (s == "ir") return EntryKind::Ir;
    if (s == "noise") return EntryKind::Noise;
    throw Error("manifest: unknown entry kind: " + s);
}

void Manifest::validate() const {
    std::unordered_set<std::string> ids, paths;
    for (const auto& e : entries) {
        if (!ids.insert(e.id).second) {
            throw Error("manifest: duplicate id: " + e.id);
        }
        if (!paths.insert(e.path).second) {
            throw Error("manifest: duplicate path: " + e.path);
        }
    }
}

void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("save_manifest: cannot open for writing: " + path);
    for (const auto& e : m.entries) {
        nlohmann::json j;
        j["id"] = e.id;
        j["path"] = e.path;
        j["kind"] = to_string(e.kind);
        j["metadata"] = e.metadata;
        f << j.dump() << "\n";
    }
    if (!f) throw Error("save_manifest: write failed: " + path);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("load_manifest: cannot open: " + path);
    Manifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ManifestEntry e;
            e.id = j.at("id").get<std::string>();
            e.path = j.at("path").get<std::string>();
            e.kind = entry_kind_from_string(j.at("kind").get<std::string>());
            if (j.contains("metadata")) {
                e.metadata = j["metadata"].get<std::map<std::string, std::string>>();
            }
            m.entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw Error("load_manifest: bad record at " + path + ":" +
                        std::to_string(lineno) + ": " + ex.what());
        }
    }
    m.validate();
    return m;
}

std::tuple<Manifest, Manifest, Manifest> split_manifest(
    const Manifest& m, std::size_t n1, std::size_t n2, std::size_t n3,
    std::uint64_t seed) {
    if (n1 + n2 + n3 != m.entries.size()) {
        throw Error("split_manifest: counts sum to " + std::to_string(n1 + n2 + n3) +
                    " but manifest has " + std::to_string(m.entries.size()) + " entries");
    }
    std::vector<std::size_t> order(m.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(order[i - 1], order[j]);
    }

    Manifest a, b, c;
    for (std::size_t i = 0; i < n1; ++i) a.entries.push_back(m.entries[order[i]]);
    for (std::size_t i = 0; i < n2; ++i) b.entries.push_back(m.entries[order[n1 + i]]);
    for (std::size_t i = 0; i < n3; ++i) c.entries.push_back(m.entries[order[n1 + n2 + i]]);
    return {std::move(a), std::move(b), std::move(c)};
}

Manifest scan_directory(const std::string& root, EntryKind kind) {
    const fs::path root_path(root);
    if (!fs::is_directory(root_path)) {
        throw Error("scan_directory: not a readable directory: " + root);
    }
    Manifest m;
    for (const auto& entry : fs::recursive_directory_iterator(root_path)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext != ".wav") continue;
        ManifestEntry e;
        e.id = fs::relative(entry.path(), root_path).generic_string();
        e.path = entry.path().generic_string();
        e.kind = kind;
        m.entries.push_back(std::move(e));
    }
    std::sort(m.entries.begin(), m.entries.end(),
              [](const ManifestEntry& x, const ManifestEntry& y) { return x.id < y.id; });
    m.validate();
    return m;
}

}  // namespace roomeq
