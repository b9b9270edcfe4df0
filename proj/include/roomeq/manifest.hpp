#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace roomeq {

enum class EntryKind { Speech, Ir, Noise };

std::string to_string(EntryKind kind);
EntryKind entry_kind_from_string(const std::string& s);

struct ManifestEntry {
    std::string id;
    std::string path;
    EntryKind kind = EntryKind::Ir;
    std::map<std::string, std::string> metadata;
};

// Record list binding corpus files; ids and paths are unique.
struct Manifest {
    std::vector<ManifestEntry> entries;

    std::size_t size() const { return entries.size(); }
    void validate() const;  // throws on duplicate ids or paths
};

// JSON-lines round trip (one entry per line, UTF-8).
void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

// Seeded uniform shuffle then contiguous partition into the exact counts.
std::tuple<Manifest, Manifest, Manifest> split_manifest(
    const Manifest& m, std::size_t n1, std::size_t n2, std::size_t n3,
    std::uint64_t seed);

// Recursive scan for WAVE files; id = path relative to root, entries in
// lexicographic id order.
Manifest scan_directory(const std::string& root, EntryKind kind);

}  // namespace roomeq
