#pragma once

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skillweave {

using Json = nlohmann::json;

enum class DocumentFormat { json, yaml };

// Raised for malformed structured documents. Line and column are 1-based;
// zero means the position is not known.
class DocumentError : public std::runtime_error {
public:
    DocumentError(const std::string& message, std::size_t line = 0, std::size_t column = 0);

    const std::string& message() const { return message_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::string message_;
    std::size_t line_;
    std::size_t column_;
};

Json parse_document(std::string_view text, DocumentFormat format = DocumentFormat::json);

// Format is picked from the extension: .yaml/.yml is YAML, anything else JSON.
Json load_document(const std::filesystem::path& path);

DocumentFormat format_for_path(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

// 64-bit FNV-1a, used to fingerprint canonical documents.
std::uint64_t fingerprint(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace skillweave
