#include "xml_document.hpp"

#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <sstream>

#include "etlgen/common.hpp"

namespace etlgen::xml {

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

Element convert(const std::string& tag, const Tree& node, const std::string& parent_path,
                std::string_view source) {
  Element element;
  element.tag = tag;
  if (!blank(node.data())) {
    throw SyntaxError(std::string(source), 0, "unexpected character data in <" + tag + ">");
  }
  for (const auto& [key, child] : node) {
    if (key == "<xmlattr>") {
      for (const auto& [name, value] : child) {
        element.attributes.emplace(name, value.data());
      }
    }
  }
  element.path = parent_path.empty() ? tag : parent_path + "/" + tag;
  if (auto it = element.attributes.find("name"); it != element.attributes.end()) {
    element.path += "[" + it->second + "]";
  }
  for (const auto& [key, child] : node) {
    if (key == "<xmlattr>" || key == "<xmlcomment>") {
      continue;
    }
    element.children.push_back(convert(key, child, element.path, source));
  }
  return element;
}

}  // namespace

const std::string* Element::find(std::string_view name) const {
  auto it = attributes.find(std::string(name));
  return it == attributes.end() ? nullptr : &it->second;
}

Element parse(const std::string& text, std::string_view source, std::string_view root_tag) {
  Tree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw SyntaxError(std::string(source), e.line(), e.message());
  }
  std::vector<const Tree::value_type*> roots;
  for (const auto& entry : tree) {
    if (entry.first != "<xmlcomment>") {
      roots.push_back(&entry);
    }
  }
  if (roots.size() != 1) {
    throw SyntaxError(std::string(source), 0, "expected exactly one root element");
  }
  if (roots.front()->first != root_tag) {
    throw SyntaxError(std::string(source), 0,
                      "root element must be <" + std::string(root_tag) + ">, found <" +
                          roots.front()->first + ">");
  }
  return convert(roots.front()->first, roots.front()->second, "", source);
}

void check_shape(const Element& element, std::initializer_list<std::string_view> required,
                 std::initializer_list<std::string_view> optional,
                 std::initializer_list<std::string_view> child_tags,
                 const std::function<void(const std::string&)>& raise) {
  auto contains = [](std::initializer_list<std::string_view> list, std::string_view v) {
    return std::find(list.begin(), list.end(), v) != list.end();
  };
  for (const auto& [name, value] : element.attributes) {
    if (!contains(required, name) && !contains(optional, name)) {
      raise(element.path + ": unknown attribute '" + name + "'");
    }
  }
  for (auto name : required) {
    const std::string* value = element.find(name);
    if (value == nullptr || value->empty()) {
      raise(element.path + ": missing attribute '" + std::string(name) + "'");
    }
  }
  for (const auto& child : element.children) {
    if (!contains(child_tags, child.tag)) {
      raise(element.path + ": unexpected element <" + child.tag + ">");
    }
  }
}

const std::string& attr(const Element& element, std::string_view name) {
  return element.attributes.at(std::string(name));
}

bool parse_bool(const Element& element, std::string_view name, bool fallback,
                const std::function<void(const std::string&)>& raise) {
  const std::string* value = element.find(name);
  if (value == nullptr) {
    return fallback;
  }
  if (*value == "true") {
    return true;
  }
  if (*value == "false") {
    return false;
  }
  raise(element.path + ": attribute '" + std::string(name) + "' must be true or false");
  return fallback;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

void Writer::start(std::string_view tag, const std::vector<std::pair<std::string, std::string>>& attrs) {
  out_.append(static_cast<std::size_t>(depth_) * 2, ' ');
  out_ += '<';
  out_ += tag;
  for (const auto& [name, value] : attrs) {
    out_ += ' ';
    out_ += name;
    out_ += "=\"";
    out_ += escape(value);
    out_ += '"';
  }
}

void Writer::open(std::string_view tag,
                  std::initializer_list<std::pair<std::string_view, std::string>> attrs) {
  std::vector<std::pair<std::string, std::string>> list;
  for (const auto& [k, v] : attrs) {
    list.emplace_back(std::string(k), v);
  }
  start(tag, list);
  out_ += ">\n";
  ++depth_;
}

void Writer::leaf(std::string_view tag,
                  std::initializer_list<std::pair<std::string_view, std::string>> attrs) {
  std::vector<std::pair<std::string, std::string>> list;
  for (const auto& [k, v] : attrs) {
    list.emplace_back(std::string(k), v);
  }
  leaf(tag, list);
}

void Writer::leaf(std::string_view tag, const std::vector<std::pair<std::string, std::string>>& attrs) {
  start(tag, attrs);
  out_ += "/>\n";
}

void Writer::close(std::string_view tag) {
  --depth_;
  out_.append(static_cast<std::size_t>(depth_) * 2, ' ');
  out_ += "</";
  out_ += tag;
  out_ += ">\n";
}

}  // namespace etlgen::xml
