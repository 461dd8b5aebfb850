#include "pgd/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pgd/errors.hpp"

namespace pgd {
namespace toml {

const std::string& Value::as_string() const {
    if (!is_string()) throw_config("toml: expected a string value");
    return std::get<std::string>(v_);
}

double Value::as_double() const {
    if (is_float()) return std::get<double>(v_);
    if (is_int()) return static_cast<double>(std::get<std::int64_t>(v_));
    throw_config("toml: expected a numeric value");
}

std::int64_t Value::as_int() const {
    if (!is_int()) throw_config("toml: expected an integer value");
    return std::get<std::int64_t>(v_);
}

bool Value::as_bool() const {
    if (!is_bool()) throw_config("toml: expected a boolean value");
    return std::get<bool>(v_);
}

const Array& Value::as_array() const {
    if (!is_array()) throw_config("toml: expected an array value");
    return std::get<Array>(v_);
}

const Value& Table::at(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) throw_config("toml: missing required key '" + key + "'");
    return it->second;
}

std::string Table::get_string(const std::string& key) const { return at(key).as_string(); }
std::string Table::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).as_string() : fallback;
}
double Table::get_double(const std::string& key) const { return at(key).as_double(); }
double Table::get_double(const std::string& key, double fallback) const {
    return has(key) ? at(key).as_double() : fallback;
}
std::int64_t Table::get_int(const std::string& key) const { return at(key).as_int(); }
std::int64_t Table::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? at(key).as_int() : fallback;
}
bool Table::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? at(key).as_bool() : fallback;
}

std::vector<double> Table::get_double_list(const std::string& key) const {
    const Array& arr = at(key).as_array();
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(v.as_double());
    return out;
}

Vec Table::get_vec(const std::string& key) const {
    const auto list = get_double_list(key);
    Vec v(static_cast<Eigen::Index>(list.size()));
    for (std::size_t i = 0; i < list.size(); ++i) v(static_cast<Eigen::Index>(i)) = list[i];
    return v;
}

Mat Table::get_mat(const std::string& key) const {
    const Array& rows = at(key).as_array();
    if (rows.empty()) throw_config("toml: matrix '" + key + "' must not be empty");
    const std::size_t ncols = rows.front().as_array().size();
    Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Array& row = rows[i].as_array();
        if (row.size() != ncols)
            throw_config("toml: matrix '" + key + "' has ragged rows");
        for (std::size_t j = 0; j < ncols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].as_double();
    }
    return m;
}

const Table& Document::table(const std::string& name) const {
    const auto it = tables.find(name);
    if (it == tables.end()) throw_config("toml: missing required table [" + name + "]");
    return it->second;
}

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        const char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw_config("toml parse error at line " + std::to_string(line) + ": " + what);
    }
    void skip_ws_and_comments(bool cross_lines) {
        while (!done()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                take();
            } else if (c == '#') {
                while (!done() && peek() != '\n') take();
            } else if (c == '\n' && cross_lines) {
                take();
            } else {
                return;
            }
        }
    }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

Value parse_value(Cursor& cur);

Value parse_array(Cursor& cur) {
    cur.take(); // '['
    Array items;
    for (;;) {
        cur.skip_ws_and_comments(true);
        if (cur.done()) cur.fail("unterminated array");
        if (cur.peek() == ']') {
            cur.take();
            break;
        }
        items.push_back(parse_value(cur));
        cur.skip_ws_and_comments(true);
        if (cur.done()) cur.fail("unterminated array");
        if (cur.peek() == ',') {
            cur.take();
        } else if (cur.peek() != ']') {
            cur.fail("expected ',' or ']' in array");
        }
    }
    return Value(std::move(items));
}

Value parse_scalar(Cursor& cur) {
    std::string token;
    while (!cur.done()) {
        const char c = cur.peek();
        if (c == ',' || c == ']' || c == '\n' || c == '#' || c == ' ' || c == '\t' || c == '\r')
            break;
        token.push_back(cur.take());
    }
    if (token.empty()) cur.fail("expected a value");
    if (token == "true") return Value(true);
    if (token == "false") return Value(false);

    const bool looks_float = token.find_first_of(".eE") != std::string::npos ||
                             token == "inf" || token == "-inf" || token == "+inf" ||
                             token == "nan";
    char* end = nullptr;
    if (!looks_float) {
        const long long i = std::strtoll(token.c_str(), &end, 10);
        if (end != nullptr && *end == '\0') return Value(static_cast<std::int64_t>(i));
    }
    const double d = std::strtod(token.c_str(), &end);
    if (end == nullptr || *end != '\0') cur.fail("cannot parse value '" + token + "'");
    return Value(d);
}

Value parse_value(Cursor& cur) {
    cur.skip_ws_and_comments(true);
    if (cur.done()) cur.fail("expected a value");
    const char c = cur.peek();
    if (c == '[') return parse_array(cur);
    if (c == '"') {
        cur.take();
        std::string s;
        while (!cur.done() && cur.peek() != '"') {
            char ch = cur.take();
            if (ch == '\\' && !cur.done()) {
                const char esc = cur.take();
                switch (esc) {
                    case 'n': ch = '\n'; break;
                    case 't': ch = '\t'; break;
                    case '"': ch = '"'; break;
                    case '\\': ch = '\\'; break;
                    default: cur.fail("unsupported escape sequence");
                }
            }
            s.push_back(ch);
        }
        if (cur.done()) cur.fail("unterminated string");
        cur.take(); // closing quote
        return Value(std::move(s));
    }
    return parse_scalar(cur);
}

} // namespace

Document parse(const std::string& text) {
    Document doc;
    Cursor cur{text};
    Table* current = &doc.root;
    while (true) {
        cur.skip_ws_and_comments(true);
        if (cur.done()) break;
        if (cur.peek() == '[') {
            cur.take();
            std::string name;
            while (!cur.done() && cur.peek() != ']') {
                const char c = cur.take();
                if (!is_bare_key_char(c) && c != '.') cur.fail("bad character in table name");
                name.push_back(c);
            }
            if (cur.done()) cur.fail("unterminated table header");
            cur.take(); // ']'
            if (name.empty()) cur.fail("empty table name");
            current = &doc.tables[name];
            continue;
        }
        std::string key;
        while (!cur.done() && is_bare_key_char(cur.peek())) key.push_back(cur.take());
        if (key.empty()) cur.fail("expected a key");
        cur.skip_ws_and_comments(false);
        if (cur.done() || cur.peek() != '=') cur.fail("expected '=' after key '" + key + "'");
        cur.take();
        Value v = parse_value(cur);
        if (current->entries.count(key) > 0) cur.fail("duplicate key '" + key + "'");
        current->entries.emplace(std::move(key), std::move(v));
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_config("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

} // namespace toml
} // namespace pgd
