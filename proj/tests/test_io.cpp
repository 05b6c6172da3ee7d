#include <doctest.h>

#include <sstream>

#include "ordmono/error.hpp"
#include "ordmono/io.hpp"

using namespace ordmono;

namespace {

template <class F>
std::string error_message(F&& f, ErrorKind expected) {
  try {
    f();
  } catch (const Error& e) {
    CHECK(e.kind() == expected);
    return e.what();
  }
  FAIL("expected an error");
  return {};
}

}  // namespace

TEST_CASE("csv: quoting, blank lines and line numbers") {
  const auto t = parse_csv("a,b\n1,\"x, y\"\n\n\"multi\nline\",\"say \"\"hi\"\"\"\n3,4");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0][1] == "x, y");
  CHECK(t.rows[1][0] == "multi\nline");
  CHECK(t.rows[1][1] == "say \"hi\"");
  CHECK(t.lines == std::vector<std::size_t>{2, 4, 6});
}

TEST_CASE("csv: CRLF endings and a byte-order mark") {
  const auto t = parse_csv("\xEF\xBB\xBFy,x\r\n1,2\r\n");
  CHECK(t.header == std::vector<std::string>{"y", "x"});
  CHECK(t.rows == std::vector<std::vector<std::string>>{{"1", "2"}});
}

TEST_CASE("csv: malformed input names the line") {
  auto msg = error_message([] { parse_csv("a,b\n1,2\n3\n"); }, ErrorKind::Parse);
  CHECK(msg.find("line 3") != std::string::npos);
  msg = error_message([] { parse_csv("a,b\n1,\"open\n"); }, ErrorKind::Parse);
  CHECK(msg.find("unterminated") != std::string::npos);
  error_message([] { read_csv("/nonexistent/file.csv"); }, ErrorKind::Io);
}

TEST_CASE("csv: write then parse is the identity (property)") {
  Table t;
  t.header = {"plain", "comma,field", "quote\"field"};
  t.rows = {{"1", "a,b", "he said \"no\""}, {"", "line\nbreak", " padded "}};
  std::ostringstream os;
  write_csv(os, t);
  const auto back = parse_csv(os.str());
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(os.str().substr(0, 6) == "plain,");
}

TEST_CASE("schema file") {
  const auto s = parse_schema(R"(
response: {name: y, levels: [low, mid, high]}
ordinal:
  - {name: education, levels: [none, primary, secondary]}
nominal:
  - {name: region, levels: [north, south]}
numeric: [age]
)");
  CHECK(s.response_name == "y");
  CHECK(s.response_levels.size() == 3);
  CHECK(s.ordinal[0].levels[2] == "secondary");
  CHECK(s.nominal[0].name == "region");
  CHECK(s.numeric == std::vector<std::string>{"age"});

  error_message([] { parse_schema("response: {name: y, levels: [a, b]}\nordinals: []\n"); },
                ErrorKind::Parse);
  error_message([] { parse_schema("response: {name: y, levels: [a]}\n"); }, ErrorKind::Parse);
  const auto msg = error_message([] { parse_schema("response: [unclosed\n", "s.yaml"); }, ErrorKind::Parse);
  CHECK(msg.find("s.yaml") != std::string::npos);
}

TEST_CASE("scenario file") {
  const auto sf = parse_scenario(R"(
name: tiny
seed: 5
n: 100
replicates: 3
response: {name: y, levels: [a, b, c]}
intercepts: [-0.5, 0.5]
ordinal:
  - {name: op, levels: [l1, l2, l3], coefficients: [0.2, 0.4], probabilities: [0.2, 0.3, 0.5]}
numeric:
  - {name: z, coefficient: 0.1, mean: 0, variance: 2}
study:
  strategies: [umle, cmle_filtered]
  alpha_star: 0.1
  mdc: {c_initial: 0.95}
)");
  CHECK(sf.spec.name == "tiny");
  CHECK(sf.spec.seed == 5);
  CHECK(sf.spec.truth.beta.size() == 3);
  CHECK(sf.spec.truth.beta[2] == 0.1);
  CHECK(sf.spec.numeric[0].variance == 2.0);
  CHECK(sf.study.strategies == std::vector<Strategy>{Strategy::Umle, Strategy::CmleFiltered});
  CHECK(sf.study.alpha_star == 0.1);
  CHECK(sf.study.mdc.c_initial == 0.95);

  error_message([] {
    parse_scenario(R"(
n: 10
replicates: 1
response: {name: y, levels: [a, b]}
intercepts: [0]
ordinal:
  - {name: op, levels: [l1, l2], coefficients: [0.2, 0.4], probabilities: [0.5, 0.5]}
)");
  }, ErrorKind::Parse);
}

TEST_CASE("every shipped scenario loads") {
  for (const char* f : {"monotone_two_op.yaml", "nonmonotone_two_op.yaml", "mixed_four_op.yaml",
                        "illustration_four_op.yaml", "standin_five_op.yaml"}) {
    CAPTURE(f);
    CHECK_NOTHROW(load_scenario(std::string(ORDMONO_DATA_DIR) + "/" + f));
  }
}
