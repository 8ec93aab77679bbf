#pragma once

#include "veasyguide/detect.hpp"
#include "veasyguide/error.hpp"
#include "veasyguide/evaluate.hpp"
#include "veasyguide/frame_source.hpp"
#include "veasyguide/geometry.hpp"
#include "veasyguide/hu_moments.hpp"
#include "veasyguide/image_io.hpp"
#include "veasyguide/ingest.hpp"
#include "veasyguide/manifest.hpp"
#include "veasyguide/pipeline.hpp"
#include "veasyguide/rocgraph.hpp"
#include "veasyguide/synth.hpp"
#include "veasyguide/union_find.hpp"
