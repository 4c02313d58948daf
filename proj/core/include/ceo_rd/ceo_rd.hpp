#pragma once

#include "ceo_rd/bergertung.hpp"
#include "ceo_rd/converse.hpp"
#include "ceo_rd/errors.hpp"
#include "ceo_rd/mcsim.hpp"
#include "ceo_rd/rdcore.hpp"
#include "ceo_rd/spectra.hpp"
