#pragma once
// Artifact I/O: deterministic content hashing, CSV/JSON writers and the
// per-run manifest.

#include <cstdint>
#include <string>
#include <vector>

namespace grushin {

std::uint64_t fnv1a64(const std::string& data);
std::string fnv1a64_hex(const std::string& data);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Collects artifacts as they are written and emits manifest.json with one
// entry (path, bytes, fnv1a64) per file plus a generated_at timestamp.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::string out_dir);

    void write(const std::string& name, const std::string& content);
    void write_manifest(const std::string& command);

    const std::string& out_dir() const { return out_dir_; }
    std::vector<std::string> artifact_paths() const;

private:
    struct Entry {
        std::string name;
        std::size_t bytes;
        std::string hash;
    };
    std::string out_dir_;
    std::vector<Entry> entries_;
};

} // namespace grushin
