#ifndef PGD_TOML_HPP
#define PGD_TOML_HPP

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "pgd/linalg.hpp"

namespace pgd {
namespace toml {

// Minimal TOML subset: top-level tables, bare keys, strings, integers,
// floats, booleans, and (possibly nested, possibly multi-line) arrays.
// Covers the model and experiment files this project reads.

class Value;
using Array = std::vector<Value>;

class Value {
public:
    Value() : v_(std::int64_t{0}) {}
    explicit Value(std::string s) : v_(std::move(s)) {}
    explicit Value(double d) : v_(d) {}
    explicit Value(std::int64_t i) : v_(i) {}
    explicit Value(bool b) : v_(b) {}
    explicit Value(Array a) : v_(std::move(a)) {}

    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_float() const { return std::holds_alternative<double>(v_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }
    bool is_number() const { return is_float() || is_int(); }

    const std::string& as_string() const;
    double as_double() const; // ints promote
    std::int64_t as_int() const;
    bool as_bool() const;
    const Array& as_array() const;

private:
    std::variant<std::string, double, std::int64_t, bool, Array> v_;
};

struct Table {
    std::map<std::string, Value> entries;

    bool has(const std::string& key) const { return entries.count(key) > 0; }
    const Value& at(const std::string& key) const;

    // Typed accessors with required/defaulted variants.
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Numeric array -> vector / Vec; array of arrays -> Mat (rows must agree).
    std::vector<double> get_double_list(const std::string& key) const;
    Vec get_vec(const std::string& key) const;
    Mat get_mat(const std::string& key) const;
};

struct Document {
    Table root;
    std::map<std::string, Table> tables;

    bool has_table(const std::string& name) const { return tables.count(name) > 0; }
    const Table& table(const std::string& name) const;
};

Document parse(const std::string& text);
Document parse_file(const std::string& path);

} // namespace toml
} // namespace pgd

#endif
