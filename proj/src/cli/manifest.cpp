#include "confsel/cli.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

namespace confsel::cli {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError(path.string(), 0, "", "cannot open file");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest initialisation failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        const auto got = static_cast<std::size_t>(in.gcount());
        if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), got);
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

nlohmann::json RunManifest::reproducible_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    nlohmann::json digests = nlohmann::json::array();
    for (const auto& [path, digest] : input_digests) {
        digests.push_back({{"path", path}, {"sha256", digest}});
    }
    j["inputs"] = std::move(digests);
    j["version"] = version;
    return j;
}

nlohmann::json RunManifest::full_json() const {
    nlohmann::json j = reproducible_json();
    j["duration_seconds"] = duration_seconds;
    return j;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& out) {
    return std::filesystem::path(out.string() + ".manifest.json");
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out) {
    std::ofstream f(manifest_path_for(out), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write manifest next to " + out.string());
    f << manifest.full_json().dump(2) << '\n';
}

} // namespace confsel::cli
