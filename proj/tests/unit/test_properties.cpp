#include "doctest.h"
#include "properties.hpp"

TEST_CASE("rkhs norm transfer between correlation matrices") {
  const property::Outcome o = property::norm_transfer(501, 200);
  CHECK(o.instances == 200);
  CHECK(o.violations == 0);
  INFO("worst excess " << o.worst_excess);
}

TEST_CASE("posterior mean gap is bounded by nu times the reference deviation") {
  const property::Outcome o = property::mean_gap(502, 200, 200);
  CHECK(o.instances == 200);
  INFO("worst excess " << o.worst_excess);
  CHECK(o.violations == 0);
}

TEST_CASE("posterior deviation ratio is bounded by gamma") {
  const property::Outcome o = property::variance_ratio(503, 200, 200);
  CHECK(o.instances == 200);
  INFO("worst excess " << o.worst_excess);
  CHECK(o.violations == 0);
}
