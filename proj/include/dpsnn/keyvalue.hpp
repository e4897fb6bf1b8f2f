#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dpsnn {

/// Flat `dotted.key = value` text document. Order of first insertion is
/// preserved; later assignments to the same key replace the value in place.
/// Blank lines and lines starting with `#` are ignored.
class KeyValueDocument
{
public:
    using Entry = std::pair<std::string, std::string>;

    /// Throws ConfigError listing every malformed line.
    static KeyValueDocument parse(std::string_view text);
    static KeyValueDocument load(const std::filesystem::path &path);

    void set(std::string key, std::string value);
    /// Parses `key=value` (as given to --set).
    void set_assignment(std::string_view assignment);
    std::optional<std::string> get(std::string_view key) const;
    bool contains(std::string_view key) const { return get(key).has_value(); }
    bool erase(std::string_view key);

    const std::vector<Entry> &entries() const { return entries_; }
    std::string emit() const;
    void save(const std::filesystem::path &path) const;

    bool operator==(const KeyValueDocument &) const = default;

private:
    std::vector<Entry> entries_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

} // namespace dpsnn
