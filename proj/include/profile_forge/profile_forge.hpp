#pragma once

// Everything, for tools and quick experiments.

#include "errors.hpp"
#include "geometry.hpp"
#include "quantize.hpp"
#include "profile.hpp"
#include "sequence.hpp"
#include "vm.hpp"
#include "tokens.hpp"
#include "json_io.hpp"
#include "svg.hpp"
#include "metrics.hpp"
#include "rl.hpp"
#include "corpus.hpp"
#include "extract/pipeline.hpp"
#include "extract/graph_hash.hpp"
#include "service.hpp"
