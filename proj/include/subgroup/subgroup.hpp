#ifndef SUBGROUP_SUBGROUP_HPP
#define SUBGROUP_SUBGROUP_HPP

#include "classifiers.hpp"
#include "crossval.hpp"
#include "csv.hpp"
#include "data.hpp"
#include "error.hpp"
#include "hotelling.hpp"
#include "ingest.hpp"
#include "kproto.hpp"
#include "logistic.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "report.hpp"
#include "selection.hpp"
#include "special.hpp"

#endif
