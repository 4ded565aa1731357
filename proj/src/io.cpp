#include "grushin/io.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "grushin/errors.hpp"

namespace grushin {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& data) {
    std::ostringstream os;
    os << std::hex << fnv1a64(data);
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

ArtifactWriter::ArtifactWriter(std::string out_dir) : out_dir_(std::move(out_dir)) {}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
    const std::string path = out_dir_ + "/" + name;
    write_text_file(path, content);
    entries_.push_back({name, content.size(), fnv1a64_hex(content)});
}

void ArtifactWriter::write_manifest(const std::string& command) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = command;
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    j["generated_at"] = buf;
    nlohmann::json arts = nlohmann::json::array();
    for (const auto& e : entries_)
        arts.push_back({{"path", e.name}, {"bytes", e.bytes}, {"fnv1a64", e.hash}});
    j["artifacts"] = arts;
    write_text_file(out_dir_ + "/manifest.json", j.dump(2) + "\n");
}

std::vector<std::string> ArtifactWriter::artifact_paths() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(out_dir_ + "/" + e.name);
    return out;
}

} // namespace grushin
