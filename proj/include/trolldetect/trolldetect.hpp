#pragma once

// Umbrella header.

#include "trolldetect/clustering.hpp"
#include "trolldetect/config.hpp"
#include "trolldetect/corpus.hpp"
#include "trolldetect/detect.hpp"
#include "trolldetect/error.hpp"
#include "trolldetect/features.hpp"
#include "trolldetect/model.hpp"
#include "trolldetect/netpbm.hpp"
#include "trolldetect/pipeline.hpp"
#include "trolldetect/random.hpp"
#include "trolldetect/som.hpp"
#include "trolldetect/text.hpp"
