#include "etlgen/star_model.hpp"

#include <set>

#include "xml_document.hpp"

namespace etlgen {

const Measure* Fact::find_measure(std::string_view measure) const {
  for (const auto& m : measures) {
    if (same_identifier(m.name, measure)) {
      return &m;
    }
  }
  return nullptr;
}

const DimAttribute* Dimension::find_attribute(std::string_view attribute) const {
  const std::size_t i = attribute_index(attribute);
  return i == std::string::npos ? nullptr : &attributes[i];
}

std::size_t Dimension::attribute_index(std::string_view attribute) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (same_identifier(attributes[i].name, attribute)) {
      return i;
    }
  }
  return std::string::npos;
}

const Hierarchy* Dimension::find_hierarchy(std::string_view hierarchy) const {
  for (const auto& h : hierarchies) {
    if (same_identifier(h.name, hierarchy)) {
      return &h;
    }
  }
  return nullptr;
}

const DimAttribute* Dimension::finest_level() const {
  if (!hierarchies.empty() && !hierarchies.front().levels.empty()) {
    return find_attribute(hierarchies.front().levels.front());
  }
  return attributes.empty() ? nullptr : &attributes.front();
}

const Dimension* StarSchema::find_dimension(std::string_view dimension) const {
  for (const auto& d : dimensions) {
    if (same_identifier(d.name, dimension)) {
      return &d;
    }
  }
  return nullptr;
}

std::string_view to_string(AttributeKind kind) {
  return kind == AttributeKind::Parameter ? "parameter" : "weak_attribute";
}

std::vector<Violation> validate_star(const StarSchema& star) {
  std::vector<Violation> out;
  const std::string fact_path = "star/fact[" + star.fact.name + "]";
  std::set<std::string> seen;
  for (const auto& measure : star.fact.measures) {
    if (!seen.insert(fold_identifier(measure.name)).second) {
      out.push_back({fact_path + "/measure[" + measure.name + "]", "duplicate measure name"});
    }
  }
  std::set<std::string> dims;
  for (const auto& dim : star.dimensions) {
    const std::string path = "star/dimension[" + dim.name + "]";
    if (!dims.insert(fold_identifier(dim.name)).second) {
      out.push_back({path, "duplicate dimension name"});
    }
    std::set<std::string> attrs;
    for (const auto& attribute : dim.attributes) {
      if (!attrs.insert(fold_identifier(attribute.name)).second) {
        out.push_back({path + "/attribute[" + attribute.name + "]", "duplicate attribute name"});
      }
    }
    std::set<std::string> hierarchies;
    for (const auto& h : dim.hierarchies) {
      const std::string hpath = path + "/hierarchy[" + h.name + "]";
      if (!hierarchies.insert(fold_identifier(h.name)).second) {
        out.push_back({hpath, "duplicate hierarchy name"});
      }
      if (h.levels.empty()) {
        out.push_back({hpath, "hierarchy has no levels"});
      }
      for (const auto& level : h.levels) {
        const DimAttribute* attribute = dim.find_attribute(level);
        if (attribute == nullptr) {
          out.push_back({hpath + "/level[" + level + "]", "level names an undeclared attribute"});
        } else if (attribute->kind != AttributeKind::Parameter) {
          out.push_back({hpath + "/level[" + level + "]", "level names a weak attribute"});
        }
      }
    }
  }
  std::set<std::string> refs;
  for (const auto& ref : star.fact.dimension_refs) {
    const std::string path = fact_path + "/dimref[" + ref + "]";
    if (star.find_dimension(ref) == nullptr) {
      out.push_back({path, "fact references undeclared dimension"});
    } else if (!refs.insert(fold_identifier(ref)).second) {
      out.push_back({path, "dimension referenced twice"});
    }
  }
  sort_violations(out);
  return out;
}

StarSchema parse_star_schema(const std::string& document_text, std::string_view source_name) {
  const xml::Element root = xml::parse(document_text, source_name, "star");
  auto raise = [](const std::string& message) -> void { throw StarSchemaError(message); };
  xml::check_shape(root, {}, {"name"}, {"fact", "dimension"}, raise);

  StarSchema star;
  if (const std::string* name = root.find("name")) {
    star.name = *name;
  }
  int facts = 0;
  for (const auto& el : root.children) {
    if (el.tag == "fact") {
      if (++facts > 1) {
        raise(el.path + ": only one fact per star is supported");
      }
      xml::check_shape(el, {"name"}, {}, {"measure", "dimref"}, raise);
      star.fact.name = xml::attr(el, "name");
      for (const auto& child : el.children) {
        if (child.tag == "measure") {
          xml::check_shape(child, {"name", "type"}, {}, {}, raise);
          Measure measure{xml::attr(child, "name"), DataType::Number};
          if (!parse_data_type(xml::attr(child, "type"), measure.data_type)) {
            raise(child.path + ": unknown type '" + xml::attr(child, "type") + "'");
          }
          star.fact.measures.push_back(std::move(measure));
        } else {
          xml::check_shape(child, {"name"}, {}, {}, raise);
          star.fact.dimension_refs.push_back(xml::attr(child, "name"));
        }
      }
      continue;
    }
    xml::check_shape(el, {"name"}, {}, {"attribute", "hierarchy"}, raise);
    Dimension dim;
    dim.name = xml::attr(el, "name");
    for (const auto& child : el.children) {
      if (child.tag == "attribute") {
        xml::check_shape(child, {"name", "kind", "type"}, {"notnull"}, {}, raise);
        DimAttribute attribute;
        attribute.name = xml::attr(child, "name");
        const std::string& kind = xml::attr(child, "kind");
        if (kind == "parameter") {
          attribute.kind = AttributeKind::Parameter;
        } else if (kind == "weak_attribute") {
          attribute.kind = AttributeKind::WeakAttribute;
        } else {
          raise(child.path + ": unknown kind '" + kind + "'");
        }
        if (!parse_data_type(xml::attr(child, "type"), attribute.data_type)) {
          raise(child.path + ": unknown type '" + xml::attr(child, "type") + "'");
        }
        attribute.not_null = xml::parse_bool(child, "notnull", false, raise);
        dim.attributes.push_back(std::move(attribute));
      } else {
        xml::check_shape(child, {"name"}, {}, {"level"}, raise);
        Hierarchy h{xml::attr(child, "name"), {}};
        for (const auto& level : child.children) {
          xml::check_shape(level, {"name"}, {}, {}, raise);
          h.levels.push_back(xml::attr(level, "name"));
        }
        dim.hierarchies.push_back(std::move(h));
      }
    }
    star.dimensions.push_back(std::move(dim));
  }
  if (facts == 0) {
    raise("star: missing <fact>");
  }
  if (auto violations = validate_star(star); !violations.empty()) {
    throw StarSchemaError(violations.front().path + ": " + violations.front().message);
  }
  return star;
}

std::string serialize_star_schema(const StarSchema& star) {
  xml::Writer w;
  w.open("star", {{"name", star.name}});
  w.open("fact", {{"name", star.fact.name}});
  for (const auto& m : star.fact.measures) {
    w.leaf("measure", {{"name", m.name}, {"type", std::string(to_string(m.data_type))}});
  }
  for (const auto& ref : star.fact.dimension_refs) {
    w.leaf("dimref", {{"name", ref}});
  }
  w.close("fact");
  for (const auto& dim : star.dimensions) {
    w.open("dimension", {{"name", dim.name}});
    for (const auto& a : dim.attributes) {
      std::vector<std::pair<std::string, std::string>> attrs = {
          {"name", a.name},
          {"kind", std::string(to_string(a.kind))},
          {"type", std::string(to_string(a.data_type))}};
      if (a.not_null) {
        attrs.emplace_back("notnull", "true");
      }
      w.leaf("attribute", attrs);
    }
    for (const auto& h : dim.hierarchies) {
      w.open("hierarchy", {{"name", h.name}});
      for (const auto& level : h.levels) {
        w.leaf("level", {{"name", level}});
      }
      w.close("hierarchy");
    }
    w.close("dimension");
  }
  w.close("star");
  return w.str();
}

}  // namespace etlgen
