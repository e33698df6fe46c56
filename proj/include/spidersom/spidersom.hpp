#pragma once

// Umbrella header: ingest -> train -> strength -> render.
#include "error.hpp"
#include "ingest.hpp"
#include "pipeline.hpp"
#include "rng.hpp"
#include "som.hpp"
#include "spider.hpp"
#include "strength.hpp"
