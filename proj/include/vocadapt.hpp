#pragma once

#include "vocadapt/bpe.hpp"
#include "vocadapt/canonical.hpp"
#include "vocadapt/common_space.hpp"
#include "vocadapt/corpus.hpp"
#include "vocadapt/corpus_io.hpp"
#include "vocadapt/embedding.hpp"
#include "vocadapt/error.hpp"
#include "vocadapt/eval.hpp"
#include "vocadapt/hash.hpp"
#include "vocadapt/parallel.hpp"
#include "vocadapt/report.hpp"
#include "vocadapt/schedule.hpp"
#include "vocadapt/sparsemax.hpp"
#include "vocadapt/tokenizer_eval.hpp"
#include "vocadapt/transfer.hpp"
#include "vocadapt/unicode.hpp"
