#include "dpsnn/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dpsnn/errors.hpp"

namespace dpsnn {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool valid_key(std::string_view key)
{
    return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    });
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
        : std::runtime_error([&] {
            std::string msg = "invalid configuration";
            for (const std::string &d : diagnostics)
            {
                msg += "\n  " + d;
            }
            return msg;
        }())
        , diagnostics_(std::move(diagnostics))
{
}

KeyValueDocument KeyValueDocument::parse(std::string_view text)
{
    KeyValueDocument doc;
    std::vector<std::string> problems;
    std::size_t line_no = 0;
    while (!text.empty())
    {
        ++line_no;
        const auto eol = text.find('\n');
        const std::string_view raw = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#')
        {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
        {
            problems.push_back("line " + std::to_string(line_no) + ": expected `key = value`");
            continue;
        }
        const std::string_view key = trim(line.substr(0, eq));
        if (!valid_key(key))
        {
            problems.push_back("line " + std::to_string(line_no) + ": bad key `" +
                    std::string(key) + "`");
            continue;
        }
        doc.set(std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    if (!problems.empty())
    {
        throw ConfigError(std::move(problems));
    }
    return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError({"cannot read " + path.string()});
    }
    std::stringstream text;
    text << in.rdbuf();
    return parse(text.str());
}

void KeyValueDocument::set(std::string key, std::string value)
{
    for (Entry &e : entries_)
    {
        if (e.first == key)
        {
            e.second = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

void KeyValueDocument::set_assignment(std::string_view assignment)
{
    const auto eq = assignment.find('=');
    const std::string_view key = trim(assignment.substr(0, eq));
    if (eq == std::string_view::npos || !valid_key(key))
    {
        throw ConfigError({"--set expects key=value, got `" + std::string(assignment) + "`"});
    }
    set(std::string(key), std::string(trim(assignment.substr(eq + 1))));
}

std::optional<std::string> KeyValueDocument::get(std::string_view key) const
{
    for (const Entry &e : entries_)
    {
        if (e.first == key)
        {
            return e.second;
        }
    }
    return std::nullopt;
}

bool KeyValueDocument::erase(std::string_view key)
{
    const auto it = std::find_if(entries_.begin(), entries_.end(),
            [&](const Entry &e) { return e.first == key; });
    if (it == entries_.end())
    {
        return false;
    }
    entries_.erase(it);
    return true;
}

std::string KeyValueDocument::emit() const
{
    std::string out;
    for (const auto &[key, value] : entries_)
    {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

void KeyValueDocument::save(const std::filesystem::path &path) const
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << emit();
}

std::string format_double(double value)
{
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

} // namespace dpsnn
