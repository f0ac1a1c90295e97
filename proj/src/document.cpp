#include "skillweave/document.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace skillweave {

namespace {

std::string position_suffix(std::size_t line, std::size_t column) {
    if (line == 0)
        return "";
    return " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
}

void locate(std::string_view text, std::size_t byte, std::size_t& line, std::size_t& column) {
    line = 1;
    column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
}

Json yaml_scalar(const YAML::Node& node) {
    const std::string& raw = node.Scalar();
    if (node.Tag() == "!")
        return raw;
    if (raw == "~" || raw == "null" || raw == "Null" || raw == "NULL")
        return nullptr;
    if (raw == "true" || raw == "True" || raw == "TRUE")
        return true;
    if (raw == "false" || raw == "False" || raw == "FALSE")
        return false;
    if (!raw.empty()) {
        std::size_t consumed = 0;
        try {
            long long integer = std::stoll(raw, &consumed);
            if (consumed == raw.size())
                return integer;
        } catch (const std::exception&) {
        }
        try {
            double real = std::stod(raw, &consumed);
            if (consumed == raw.size())
                return real;
        } catch (const std::exception&) {
        }
    }
    return raw;
}

Json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
        return nullptr;
    case YAML::NodeType::Scalar:
        return yaml_scalar(node);
    case YAML::NodeType::Sequence: {
        Json array = Json::array();
        for (const auto& item : node)
            array.push_back(yaml_to_json(item));
        return array;
    }
    case YAML::NodeType::Map: {
        Json object = Json::object();
        for (const auto& entry : node)
            object[entry.first.as<std::string>()] = yaml_to_json(entry.second);
        return object;
    }
    }
    return nullptr;
}

}  // namespace

DocumentError::DocumentError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(message + position_suffix(line, column)),
      message_(message),
      line_(line),
      column_(column) {
}

Json parse_document(std::string_view text, DocumentFormat format) {
    if (format == DocumentFormat::yaml) {
        try {
            return yaml_to_json(YAML::Load(std::string(text)));
        } catch (const YAML::ParserException& e) {
            throw DocumentError("syntax error: " + e.msg, e.mark.line + 1, e.mark.column + 1);
        }
    }
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 0;
        std::size_t column = 0;
        locate(text, e.byte == 0 ? 0 : e.byte - 1, line, column);
        throw DocumentError("syntax error", line, column);
    }
}

DocumentFormat format_for_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".yaml" || ext == ".yml")
        return DocumentFormat::yaml;
    return DocumentFormat::json;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DocumentError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Json load_document(const std::filesystem::path& path) {
    std::string text = read_text_file(path);
    try {
        return parse_document(text, format_for_path(path));
    } catch (const DocumentError& e) {
        throw DocumentError(path.string() + ": " + e.message(), e.line(), e.column());
    }
}

std::uint64_t fingerprint(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

}  // namespace skillweave
