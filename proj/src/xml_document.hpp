#pragma once

// Thin wrapper over Boost.PropertyTree's XML reader/writer used by the three
// document parsers. Elements keep document order.

#include <boost/property_tree/ptree.hpp>

#include <functional>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace etlgen::xml {

using Tree = boost::property_tree::ptree;

struct Element {
  std::string tag;
  std::string path;  // e.g. schema/table[Produit]/column[codeP]
  std::map<std::string, std::string> attributes;
  std::vector<Element> children;

  bool has(std::string_view name) const { return attributes.find(std::string(name)) != attributes.end(); }
  const std::string* find(std::string_view name) const;
};

/// Parses `text`; throws SyntaxError on malformed XML, on character data
/// inside elements, or when the root tag differs from `root_tag`.
Element parse(const std::string& text, std::string_view source, std::string_view root_tag);

/// Throws `make_error(message)` when `element` carries an attribute outside
/// `allowed`, lacks one of `required`, or has children not in `child_tags`.
void check_shape(const Element& element, std::initializer_list<std::string_view> required,
                 std::initializer_list<std::string_view> optional,
                 std::initializer_list<std::string_view> child_tags,
                 const std::function<void(const std::string&)>& raise);

/// Value of a required attribute (call after check_shape).
const std::string& attr(const Element& element, std::string_view name);

/// Parses "true"/"false"; anything else raises.
bool parse_bool(const Element& element, std::string_view name, bool fallback,
                const std::function<void(const std::string&)>& raise);

/// Incremental writer producing indented XML with attribute order preserved.
class Writer {
 public:
  void open(std::string_view tag, std::initializer_list<std::pair<std::string_view, std::string>> attrs);
  void leaf(std::string_view tag, std::initializer_list<std::pair<std::string_view, std::string>> attrs);
  void leaf(std::string_view tag, const std::vector<std::pair<std::string, std::string>>& attrs);
  void close(std::string_view tag);
  std::string str() const { return out_; }

 private:
  void start(std::string_view tag, const std::vector<std::pair<std::string, std::string>>& attrs);
  std::string out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  int depth_ = 0;
};

std::string escape(std::string_view text);

}  // namespace etlgen::xml
