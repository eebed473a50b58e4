#pragma once

// Single include for the whole toolkit: dataset synthesis, syslog transport,
// detector harness, aggregation, statistics, and reporting.

#include "synlog/aggregate.hpp"
#include "synlog/cochran.hpp"
#include "synlog/codec.hpp"
#include "synlog/csv.hpp"
#include "synlog/dataset_io.hpp"
#include "synlog/detector.hpp"
#include "synlog/error.hpp"
#include "synlog/generator.hpp"
#include "synlog/integrity.hpp"
#include "synlog/labels.hpp"
#include "synlog/net.hpp"
#include "synlog/pipeline.hpp"
#include "synlog/pools.hpp"
#include "synlog/prediction.hpp"
#include "synlog/record.hpp"
#include "synlog/report.hpp"
#include "synlog/rng.hpp"
#include "synlog/scenario.hpp"
#include "synlog/stats.hpp"
