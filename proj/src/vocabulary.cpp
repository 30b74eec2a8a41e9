#include "etlgen/vocabulary.hpp"

namespace etlgen {

std::string_view to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add:
      return "+";
    case ArithOp::Sub:
      return "-";
    case ArithOp::Mul:
      return "*";
    case ArithOp::Div:
      return "/";
  }
  return "?";
}

std::string_view to_string(DatePartKind part) {
  switch (part) {
    case DatePartKind::Day:
      return "day";
    case DatePartKind::MonthNum:
      return "month_num";
    case DatePartKind::MonthName:
      return "month_name";
    case DatePartKind::Year:
      return "year";
  }
  return "?";
}

std::string_view to_string(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::Sum:
      return "sum";
    case AggregateFn::Avg:
      return "avg";
    case AggregateFn::Min:
      return "min";
    case AggregateFn::Max:
      return "max";
    case AggregateFn::Count:
      return "count";
  }
  return "?";
}

std::string_view to_string(Format format) {
  switch (format) {
    case Format::Number:
      return "number";
    case Format::String:
      return "string";
    case Format::Date:
      return "date";
    case Format::Upper:
      return "upper";
    case Format::Lower:
      return "lower";
  }
  return "?";
}

std::optional<DatePartKind> parse_date_part(std::string_view text) {
  for (auto part : {DatePartKind::Day, DatePartKind::MonthNum, DatePartKind::MonthName, DatePartKind::Year}) {
    if (to_string(part) == text) {
      return part;
    }
  }
  return std::nullopt;
}

std::optional<AggregateFn> parse_aggregate_fn(std::string_view text) {
  for (auto fn : {AggregateFn::Sum, AggregateFn::Avg, AggregateFn::Min, AggregateFn::Max, AggregateFn::Count}) {
    if (to_string(fn) == text) {
      return fn;
    }
  }
  return std::nullopt;
}

std::optional<Format> parse_format(std::string_view text) {
  for (auto f : {Format::Number, Format::String, Format::Date, Format::Upper, Format::Lower}) {
    if (to_string(f) == text) {
      return f;
    }
  }
  return std::nullopt;
}

bool is_supported_conversion(Format from, Format to) {
  switch (from) {
    case Format::Number:
    case Format::Date:
      return to == Format::String;
    case Format::String:
      return to == Format::Number || to == Format::Date || to == Format::Upper || to == Format::Lower;
    default:
      return false;
  }
}

DataType conversion_input_type(Format from) {
  switch (from) {
    case Format::Number:
      return DataType::Number;
    case Format::Date:
      return DataType::Date;
    default:
      return DataType::String;
  }
}

DataType conversion_output_type(Format to) {
  switch (to) {
    case Format::Number:
      return DataType::Number;
    case Format::Date:
      return DataType::Date;
    default:
      return DataType::String;
  }
}

}  // namespace etlgen
