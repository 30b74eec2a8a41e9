#include "etlgen/schema_model.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>

#include "xml_document.hpp"

namespace etlgen {

const Column* Table::find_column(std::string_view column) const {
  for (const auto& c : columns) {
    if (same_identifier(c.name, column)) {
      return &c;
    }
  }
  return nullptr;
}

const Table* SourceSchema::find_table(std::string_view table) const {
  for (const auto& t : tables) {
    if (same_identifier(t.name, table)) {
      return &t;
    }
  }
  return nullptr;
}

const Column* SourceSchema::find_column(std::string_view table, std::string_view column) const {
  const Table* t = find_table(table);
  return t == nullptr ? nullptr : t->find_column(column);
}

std::vector<Violation> validate_source_schema(const SourceSchema& schema) {
  std::vector<Violation> out;
  std::set<std::string> table_keys;
  for (const auto& table : schema.tables) {
    const std::string path = "schema/table[" + table.name + "]";
    if (!table_keys.insert(fold_identifier(table.name)).second) {
      out.push_back({path, "duplicate table name"});
    }
    std::set<std::string> column_keys;
    for (const auto& column : table.columns) {
      const std::string cpath = path + "/column[" + column.name + "]";
      if (!column_keys.insert(fold_identifier(column.name)).second) {
        out.push_back({cpath, "duplicate column name"});
      }
      if (column.foreign_key) {
        const auto& fk = *column.foreign_key;
        const Column* target = schema.find_column(fk.table, fk.column);
        if (target == nullptr) {
          out.push_back({cpath, "foreign key target " + fk.table + "." + fk.column + " does not exist"});
        } else if (target->data_type != column.data_type) {
          out.push_back({cpath, "foreign key target " + fk.table + "." + fk.column +
                                    " has a different data type"});
        }
      }
    }
    if (table.primary_key.empty()) {
      out.push_back({path, "primary key is empty"});
    }
    for (const auto& key : table.primary_key) {
      const Column* column = table.find_column(key);
      if (column == nullptr) {
        out.push_back({path, "primary key column " + key + " does not exist"});
      } else if (column->nullable) {
        out.push_back({path, "primary key column " + key + " is nullable"});
      }
    }
  }
  sort_violations(out);
  return out;
}

SourceSchema parse_source_schema(const std::string& document_text, std::string_view source_name) {
  const xml::Element root = xml::parse(document_text, source_name, "schema");
  auto raise = [](const std::string& message) -> void { throw SchemaError(message); };

  xml::check_shape(root, {"name"}, {}, {"table"}, raise);
  SourceSchema schema;
  schema.name = xml::attr(root, "name");
  for (const auto& table_el : root.children) {
    xml::check_shape(table_el, {"name"}, {}, {"column"}, raise);
    Table table;
    table.name = xml::attr(table_el, "name");
    for (const auto& col_el : table_el.children) {
      xml::check_shape(col_el, {"name", "type"}, {"pk", "nullable", "fk"}, {}, raise);
      Column column;
      column.name = xml::attr(col_el, "name");
      if (!parse_data_type(xml::attr(col_el, "type"), column.data_type)) {
        raise(col_el.path + ": unknown type '" + xml::attr(col_el, "type") + "'");
      }
      column.nullable = xml::parse_bool(col_el, "nullable", false, raise);
      if (xml::parse_bool(col_el, "pk", false, raise)) {
        table.primary_key.push_back(column.name);
      }
      if (const std::string* fk = col_el.find("fk")) {
        const auto dot = fk->find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == fk->size()) {
          raise(col_el.path + ": fk must have the form Table.Column");
        }
        column.foreign_key = ForeignKey{fk->substr(0, dot), fk->substr(dot + 1)};
      }
      table.columns.push_back(std::move(column));
    }
    schema.tables.push_back(std::move(table));
  }
  if (auto violations = validate_source_schema(schema); !violations.empty()) {
    throw SchemaError(violations.front().path + ": " + violations.front().message);
  }
  return schema;
}

std::string serialize_source_schema(const SourceSchema& schema) {
  xml::Writer w;
  w.open("schema", {{"name", schema.name}});
  for (const auto& table : schema.tables) {
    w.open("table", {{"name", table.name}});
    for (const auto& column : table.columns) {
      std::vector<std::pair<std::string, std::string>> attrs = {
          {"name", column.name}, {"type", std::string(to_string(column.data_type))}};
      const bool pk = std::any_of(table.primary_key.begin(), table.primary_key.end(),
                                  [&](const std::string& k) { return same_identifier(k, column.name); });
      if (pk) {
        attrs.emplace_back("pk", "true");
      }
      if (column.nullable) {
        attrs.emplace_back("nullable", "true");
      }
      if (column.foreign_key) {
        attrs.emplace_back("fk", column.foreign_key->table + "." + column.foreign_key->column);
      }
      w.leaf("column", attrs);
    }
    w.close("table");
  }
  w.close("schema");
  return w.str();
}

namespace {

struct Edge {
  std::string neighbor;  // canonical table name
  std::string local_column;
  std::string neighbor_column;
};

}  // namespace

JoinPath fk_join_path(const SourceSchema& schema, std::string_view root,
                      const std::set<std::string>& targets) {
  const Table* root_table = schema.find_table(root);
  if (root_table == nullptr) {
    throw NoJoinPath(std::string(root));
  }
  if (targets.empty()) {
    return {};
  }

  // Undirected adjacency keyed by folded table name.
  std::map<std::string, std::vector<Edge>> adjacency;
  for (const auto& table : schema.tables) {
    for (const auto& column : table.columns) {
      if (!column.foreign_key) {
        continue;
      }
      const Table* target = schema.find_table(column.foreign_key->table);
      const Column* target_col = target ? target->find_column(column.foreign_key->column) : nullptr;
      if (target_col == nullptr) {
        continue;
      }
      adjacency[fold_identifier(table.name)].push_back({target->name, column.name, target_col->name});
      adjacency[fold_identifier(target->name)].push_back({table.name, target_col->name, column.name});
    }
  }
  for (auto& [key, edges] : adjacency) {
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return std::forward_as_tuple(fold_identifier(a.neighbor), fold_identifier(a.local_column),
                                   fold_identifier(a.neighbor_column)) <
             std::forward_as_tuple(fold_identifier(b.neighbor), fold_identifier(b.local_column),
                                   fold_identifier(b.neighbor_column));
    });
  }

  struct Visit {
    std::string parent;  // folded
    JoinStep step;
    std::size_t order = 0;
  };
  std::map<std::string, Visit> visited;
  const std::string root_key = fold_identifier(root_table->name);
  visited[root_key] = Visit{"", {}, 0};
  std::deque<std::pair<std::string, std::string>> queue = {{root_key, root_table->name}};
  std::size_t order = 0;
  while (!queue.empty()) {
    auto [key, name] = queue.front();
    queue.pop_front();
    for (const auto& edge : adjacency[key]) {
      const std::string next = fold_identifier(edge.neighbor);
      if (visited.count(next) != 0) {
        continue;
      }
      visited[next] = Visit{key, JoinStep{name, edge.local_column, edge.neighbor, edge.neighbor_column}, ++order};
      queue.emplace_back(next, edge.neighbor);
    }
  }

  std::map<std::size_t, JoinStep> chosen;
  for (const auto& target : targets) {
    const Table* table = schema.find_table(target);
    if (table == nullptr) {
      throw NoJoinPath(target);
    }
    std::string key = fold_identifier(table->name);
    if (visited.count(key) == 0) {
      throw NoJoinPath(table->name);
    }
    while (key != root_key) {
      const Visit& v = visited.at(key);
      chosen.emplace(v.order, v.step);
      key = v.parent;
    }
  }
  JoinPath path;
  for (auto& [ord, step] : chosen) {
    path.steps.push_back(step);
  }
  return path;
}

}  // namespace etlgen
