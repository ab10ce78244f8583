#include "kidex/generator.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "kidex/error.hpp"

namespace kidex::gen {

namespace {

constexpr int kPageWidth = 1240;
constexpr int kPageHeight = 1754;
constexpr int kRowHeight = 44;
constexpr int kInset = 4;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// std distributions are implementation-defined, so sampling is done here on
// top of the raw engine to keep corpora identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % span;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(v.size()) - 1))];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(i) - 1))]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

using Strings = std::vector<std::string>;

// ---------------------------------------------------------------------------
// Number rendering
// ---------------------------------------------------------------------------

std::string group_digits(std::int64_t v, char sep) {
  std::string d = std::to_string(v);
  std::string out;
  const int n = static_cast<int>(d.size());
  for (int i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out.push_back(sep);
    out.push_back(d[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Fixed two-decimal rendering of hundredths.
std::string render_hundredths(std::int64_t h, bool english) {
  const std::int64_t a = h < 0 ? -h : h;
  std::string frac = std::to_string(a % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return group_digits(a / 100, english ? ',' : '.') + (english ? "." : ",") + frac;
}

std::string money_text(std::int64_t cents, bool english, Rng& rng) {
  const std::string v = render_hundredths(cents, english);
  if (english) return rng.chance(0.5) ? "€" + v : "EUR " + v;
  switch (rng.range(0, 2)) {
    case 0: return "€ " + v;
    case 1: return v + " €";
    default: return "EUR " + v;
  }
}

std::string percent_text(std::int64_t hundredths, bool english, Rng& rng) {
  std::string sign;
  if (hundredths < 0) sign = (!english && rng.chance(0.2)) ? "−" : "-";
  const std::string v = sign + render_hundredths(hundredths, english);
  if (english) return v + "%";
  return rng.chance(0.5) ? v + "%" : v + " %";
}

Decimal hundredths_decimal(std::int64_t h) { return Decimal::from_scaled(h, 2); }

// ---------------------------------------------------------------------------
// Table layout
// ---------------------------------------------------------------------------

struct CellSpec {
  int c0 = 0;
  int c1 = 1;
  std::string text;
  bool anchor = false;
  bool numeric = false;
  int span = 1;
};

struct TableSpec {
  TableType type = TableType::performance_scenarios;
  std::vector<int> edges;  // column boundaries, left to right
  std::vector<std::vector<CellSpec>> rows;
  int top = 0;
  bool decoy = false;
};

struct Placed {
  std::size_t detection;
  std::optional<std::size_t> ocr;
  bool anchor;
  bool numeric;
};

struct PlacedTable {
  TableType type;
  bool decoy;
  std::vector<Placed> cells;
};

std::vector<int> even_edges(int left, int first_width, int right, int columns) {
  std::vector<int> e{left, left + first_width};
  const int rest = right - e.back();
  for (int c = 1; c <= columns; ++c) e.push_back(left + first_width + rest * c / columns);
  return e;
}

int table_height(const TableSpec& t) { return static_cast<int>(t.rows.size()) * kRowHeight; }

PlacedTable place_table(const TableSpec& t, PageDetections& page, Rng& rng) {
  PlacedTable out{t.type, t.decoy, {}};
  Detection table;
  table.cls = rng.chance(0.5) ? DetectionClass::bordered_table : DetectionClass::borderless_table;
  table.confidence = static_cast<double>(rng.range(80, 99)) / 100.0;
  table.bbox = {t.edges.front(), t.top, t.edges.back(), t.top + table_height(t)};
  page.detections.push_back(table);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const int row_top = t.top + static_cast<int>(r) * kRowHeight;
    for (const CellSpec& c : t.rows[r]) {
      Detection d;
      d.cls = DetectionClass::cell;
      d.confidence = static_cast<double>(rng.range(65, 99)) / 100.0;
      d.bbox.left = t.edges[static_cast<std::size_t>(c.c0)] + kInset;
      d.bbox.right = t.edges[static_cast<std::size_t>(c.c1)] - kInset;
      d.bbox.top = row_top + kInset + static_cast<int>(rng.range(-2, 2));
      d.bbox.bottom = row_top + c.span * kRowHeight - kInset + static_cast<int>(rng.range(-2, 2));
      page.detections.push_back(d);
      Placed p{page.detections.size() - 1, std::nullopt, c.anchor, c.numeric};
      if (!c.text.empty()) {
        OcrEntry e;
        e.bbox.left = std::max(0, d.bbox.left - static_cast<int>(rng.range(0, 3)));
        e.bbox.top = std::max(0, d.bbox.top - static_cast<int>(rng.range(0, 3)));
        e.bbox.right = std::min(kPageWidth, d.bbox.right + static_cast<int>(rng.range(0, 3)));
        e.bbox.bottom = std::min(kPageHeight, d.bbox.bottom + static_cast<int>(rng.range(0, 3)));
        e.text = c.text;
        page.ocr.push_back(std::move(e));
        p.ocr = page.ocr.size() - 1;
      }
      out.cells.push_back(p);
    }
  }
  return out;
}

// Free text printed above a table; it is OCR'd but lies outside every mask.
void add_caption(PageDetections& page, int top, const std::string& text) {
  page.ocr.push_back({BBox{100, top - 60, 900, top - 24}, text});
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

const Strings kCountries{"IT", "LU", "IE", "FR", "DE", "CH", "NL", "AT"};
const Strings kNameHeads{"Alfa", "Orizzonte", "Sigma", "Delta", "Aurora", "Vega",
                         "Atlante", "Prisma", "Meridiano", "Zenit", "Libra", "Nova"};
const Strings kNameKindsIt{"Obbligazionario", "Azionario", "Bilanciato", "Flessibile", "Cedola", "Reddito"};
const Strings kNameKindsEn{"Bond", "Equity", "Balanced", "Flexible", "Income", "Growth"};
const Strings kNameTails{"Plus", "Global", "Dinamico", "Prudente", "Europa", "Select"};
const Strings kSurnames{"Rossi", "Bianchi", "Verdi", "Ferrari", "Galli", "Conti",
                        "Moretti", "Fontana", "Marino", "Greco", "Lombardi", "Colombo"};
const Strings kFirmKinds{"Asset Management", "Investimenti", "Capital", "Gestioni", "Vita", "Finanza"};
const Strings kFirmForms{"SGR", "SpA", "SA", "AG", "Ltd", "SICAV"};
const Strings kTlds{"it", "com", "eu", "lu"};
const Strings kAuthoritiesIt{"CONSOB", "Banca d'Italia", "IVASS"};
const Strings kAuthoritiesEn{"CSSF", "Central Bank of Ireland", "BaFin", "FINMA"};

struct Product {
  std::string isin;
  std::string name;
  std::string manufacturer;
  std::string website;
  std::string phone;
  std::string date;
  std::string authority;
  int sri = 1;
  int rhp = 1;  // recommended holding period, years
  bool isin_by_code_label = false;
};

std::string digits(Rng& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + rng.range(0, 9)));
  return s;
}

std::string two(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

Product make_product(Rng& rng, bool english) {
  Product p;
  p.isin = rng.pick(kCountries) + digits(rng, 10);
  p.name = rng.pick(kNameHeads) + " " + rng.pick(english ? kNameKindsEn : kNameKindsIt);
  if (rng.chance(0.5)) p.name += " " + rng.pick(kNameTails);
  if (rng.chance(0.4)) p.name += " " + std::to_string(rng.range(2025, 2035));
  const std::string surname = rng.pick(kSurnames);
  const std::string kind = rng.pick(kFirmKinds);
  p.manufacturer = surname + " " + kind + " " + rng.pick(kFirmForms);
  std::string host;
  for (char c : surname + kind) {
    if (c != ' ') host.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  p.website = "www." + host + "." + rng.pick(kTlds);
  p.phone = english ? "+352 " + digits(rng, 2) + " " + digits(rng, 2) + " " + digits(rng, 4)
                    : "+39 0" + std::to_string(rng.range(2, 9)) + " " + digits(rng, 4) + " " + digits(rng, 4);
  p.date = two(static_cast<int>(rng.range(1, 28))) + "/" + two(static_cast<int>(rng.range(1, 12))) + "/" +
           std::to_string(rng.range(2019, 2024));
  p.authority = rng.pick(english ? kAuthoritiesEn : kAuthoritiesIt);
  p.sri = static_cast<int>(rng.range(1, 7));
  static const std::vector<int> kHolding{1, 2, 3, 5, 7, 10};
  p.rhp = rng.pick(kHolding);
  p.isin_by_code_label = rng.chance(0.3);
  return p;
}

std::vector<int> period_years(int rhp) {
  if (rhp == 1) return {1};
  if (rhp == 2) return {1, 2};
  return {1, (rhp + 1) / 2, rhp};
}

Period period_for(std::size_t i, std::size_t count) {
  if (i + 1 == count) return Period::recommended;
  return i == 0 ? Period::initial : Period::intermediate;
}

std::string years_text(int y, bool english) {
  if (english) return std::to_string(y) + (y == 1 ? " year" : " years");
  return std::to_string(y) + (y == 1 ? " anno" : " anni");
}

// ---------------------------------------------------------------------------
// Page text
// ---------------------------------------------------------------------------

std::vector<std::string> page_texts(const Product& p, bool english) {
  std::vector<std::string> pages(3);
  std::ostringstream p1, p2, p3;
  if (english) {
    p1 << "Key Information Document\n"
       << "Purpose\n"
       << "This document provides you with key information about this investment product. "
          "It is not marketing material.\n"
       << "Product\n"
       << "Product name: " << p.name << ".\n"
       << "Manufacturer: " << p.manufacturer << ".\n"
       << (p.isin_by_code_label ? "Product code: " : "ISIN: ") << p.isin << ".\n"
       << "Website: " << p.website << ". Call " << p.phone << " for more information.\n"
       << "Competent authority: " << p.authority << ".\n"
       << "Date of production of this document: " << p.date << ".\n"
       << "What is this product?\n"
       << "Type: investment fund. Objectives: the fund aims to grow the value of your investment "
          "over the recommended holding period.\n";
    p2 << "What are the risks and what could I get in return?\n"
       << "Risk indicator\n"
       << "We have classified this product as " << p.sri << " out of 7, which reflects the potential "
          "losses from future performance.\n"
       << "Performance scenarios\n"
       << "Investment EUR 10,000. The scenarios shown illustrate how your investment could perform.\n"
       << "What happens if " << p.manufacturer << " is unable to pay out?\n"
       << "You may face a financial loss. This loss is not covered by an investor compensation scheme.\n";
    p3 << "What are the costs?\n"
       << "Costs over time\n"
       << "The reduction in yield shows what impact the costs you pay will have on the investment return.\n"
       << "Composition of costs\n"
       << "The table below shows the impact each year of the different types of costs.\n"
       << "How long should I hold it and can I take money out early?\n"
       << "Recommended holding period: " << years_text(p.rhp, true) << ".\n"
       << "How can I complain?\n"
       << "Complaints can be sent in writing to " << p.manufacturer << ".\n"
       << "Other relevant information\n"
       << "Further documents are available at " << p.website << ".\n";
  } else {
    p1 << "Documento contenente le informazioni chiave\n"
       << "Scopo\n"
       << "Il presente documento contiene informazioni chiave relative a questo prodotto "
          "d'investimento. Non si tratta di un documento promozionale.\n"
       << "Prodotto\n"
       << "Nome del prodotto: " << p.name << ".\n"
       << "Ideatore del prodotto: " << p.manufacturer << ".\n"
       << (p.isin_by_code_label ? "Codice del prodotto: " : "ISIN: ") << p.isin << ".\n"
       << "Sito web: " << p.website << ". Per ulteriori informazioni chiamare il numero " << p.phone
       << ".\n"
       << "Autorità di vigilanza competente: " << p.authority << ".\n"
       << "Data di realizzazione del documento: " << p.date << ".\n"
       << "Cos'è questo prodotto?\n"
       << "Tipo: fondo comune di investimento. Obiettivi: il fondo mira ad accrescere il capitale "
          "nel periodo di detenzione raccomandato.\n";
    p2 << "Quali sono i rischi e qual è il potenziale rendimento?\n"
       << "Indicatore di rischio\n"
       << "Abbiamo classificato questo prodotto al livello " << p.sri << " su 7, che corrisponde alla "
          "classe di rischio indicata.\n"
       << "Scenari di performance\n"
       << "Investimento 10.000 EUR. Gli scenari presentati sono una stima della performance futura.\n"
       << "Cosa accade se " << p.manufacturer << " non è in grado di corrispondere quanto dovuto?\n"
       << "L'investitore potrebbe subire una perdita finanziaria non coperta da sistemi di indennizzo.\n";
    p3 << "Quali sono i costi?\n"
       << "Andamento dei costi nel tempo\n"
       << "La diminuzione del rendimento esprime l'impatto dei costi sul possibile rendimento "
          "dell'investimento.\n"
       << "Composizione dei costi\n"
       << "La tabella seguente presenta l'impatto annuale delle diverse categorie di costi.\n"
       << "Per quanto tempo devo detenerlo e posso ritirare il capitale prematuramente?\n"
       << "Periodo di detenzione raccomandato: " << years_text(p.rhp, false) << ".\n"
       << "Come presentare reclami?\n"
       << "I reclami possono essere presentati per iscritto a " << p.manufacturer << ".\n"
       << "Altre informazioni rilevanti\n"
       << "Ulteriori documenti sono disponibili sul sito " << p.website << ".\n";
  }
  pages[0] = p1.str();
  pages[1] = p2.str();
  pages[2] = p3.str();
  return pages;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

const Strings kScenarioIt{"Scenario di stress", "Scenario sfavorevole", "Scenario moderato",
                          "Scenario favorevole"};
const Strings kScenarioEn{"Stress scenario", "Unfavourable scenario", "Moderate scenario",
                          "Favourable scenario"};

struct Built {
  TableSpec spec;
  TableRecord record;
};

Built performance_table(const Product& p, bool english, Rng& rng) {
  const auto years = period_years(p.rhp);
  const int np = static_cast<int>(years.size());
  Built b;
  b.spec.type = TableType::performance_scenarios;
  b.spec.edges = even_edges(100, 280, 1140, 2 * np);
  std::vector<CellSpec> header{{0, 1, english ? "Scenarios" : "Scenari"}};
  for (int i = 0; i < np; ++i) {
    std::string t = years_text(years[static_cast<std::size_t>(i)], english);
    if (i + 1 == np) t += english ? " (recommended holding period)" : " (periodo di detenzione raccomandato)";
    header.push_back({1 + 2 * i, 3 + 2 * i, t});
  }
  b.spec.rows.push_back(header);
  PerformanceScenariosRecord rec;
  // Refund multipliers in per-mille of the 10,000 invested.
  const std::int64_t lo[] = {300, 800, 950, 1100};
  const std::int64_t hi[] = {900, 1000, 1300, 1800};
  for (std::size_t s = 0; s < 4; ++s) {
    std::vector<CellSpec> row{{0, 1, (english ? kScenarioEn : kScenarioIt)[s], true}};
    for (int i = 0; i < np; ++i) {
      const std::int64_t cents = rng.range(lo[s], hi[s]) * 1000 + rng.range(0, 999);
      const int y = years[static_cast<std::size_t>(i)];
      const std::int64_t yield = (cents - 1'000'000) / (100 * y);
      row.push_back({1 + 2 * i, 2 + 2 * i, money_text(cents, english, rng), false, true});
      row.push_back({2 + 2 * i, 3 + 2 * i, percent_text(yield, english, rng), false, true});
      rec.entries[{kAllScenarios[s], period_for(static_cast<std::size_t>(i), years.size())}] =
          ScenarioValues{hundredths_decimal(cents), hundredths_decimal(yield)};
    }
    b.spec.rows.push_back(row);
  }
  b.record = rec;
  return b;
}

Built evolution_table(const Product& p, bool english, Rng& rng) {
  const auto years = period_years(p.rhp);
  const int np = static_cast<int>(years.size());
  Built b;
  b.spec.type = TableType::costs_evolution;
  b.spec.edges = even_edges(100, 380, 1140, np);
  std::vector<CellSpec> header{{0, 1, english ? "Investment EUR 10,000" : "Investimento 10.000 EUR"}};
  for (int i = 0; i < np; ++i) {
    const int y = years[static_cast<std::size_t>(i)];
    std::string t = english ? "If you cash in after " + years_text(y, true)
                            : "In caso di disinvestimento dopo " + years_text(y, false);
    if (i + 1 == np) t += english ? " (recommended holding period)" : " (periodo di detenzione raccomandato)";
    header.push_back({1 + i, 2 + i, t});
  }
  std::string riy_label = english ? "Impact on return (RIY) per year" : "Impatto sul rendimento (RIY) per anno";
  if (rng.chance(0.5)) {
    // Long labels wrap inside their cell.
    riy_label = english ? "Impact on return\n(RIY) per year" : "Impatto sul rendimento\n(RIY) per anno";
  }
  std::vector<CellSpec> totals{{0, 1, english ? "Total costs" : "Costi totali", true}};
  std::vector<CellSpec> riys{{0, 1, riy_label, true}};
  // Sometimes OCR sees one period's two values as a single stacked cell.
  const int merged = rng.chance(0.3) ? static_cast<int>(rng.range(0, np - 1)) : -1;
  CostsEvolutionRecord rec;
  std::int64_t cost = 0;
  for (int i = 0; i < np; ++i) {
    cost += rng.range(50, 900) * 100 + rng.range(0, 99);
    const std::int64_t riy = rng.range(20, 400);
    const std::string cost_text = money_text(cost, english, rng);
    const std::string riy_text = percent_text(riy, english, rng);
    if (i == merged) {
      totals.push_back({1 + i, 2 + i, cost_text + "\n" + riy_text, false, true, 2});
    } else {
      totals.push_back({1 + i, 2 + i, cost_text, false, true});
      riys.push_back({1 + i, 2 + i, riy_text, false, true});
    }
    rec.entries[period_for(static_cast<std::size_t>(i), years.size())] =
        CostValues{hundredths_decimal(cost), hundredths_decimal(riy)};
  }
  b.spec.rows = {header, totals, riys};
  b.record = rec;
  return b;
}

struct CategoryText {
  CostCategory category;
  const char* it_label;
  const char* en_label;
  const char* it_desc;
  const char* en_desc;
  int group;  // 0 one-off, 1 ongoing, 2 incidental
};

const CategoryText kCategories[] = {
    {CostCategory::entry, "Costi di ingresso", "Entry costs",
     "Impatto dei costi da sostenere al momento della sottoscrizione dell'investimento",
     "The impact of the costs you pay when entering your investment", 0},
    {CostCategory::exit, "Costi di uscita", "Exit costs",
     "Impatto dei costi sostenuti per uscire dall'investimento alla scadenza",
     "The impact of the costs of exiting your investment when it matures", 0},
    {CostCategory::portfolio_transaction, "Costi di transazione del portafoglio",
     "Portfolio transaction costs",
     "Impatto dei costi di acquisto e vendita degli investimenti sottostanti",
     "The impact of buying and selling underlying investments", 1},
    {CostCategory::other_recurrent, "Altri costi correnti", "Other ongoing costs",
     "Impatto dei costi trattenuti ogni anno per la gestione dell'investimento",
     "The impact of the costs taken each year for managing your investments", 1},
    {CostCategory::performance_fees, "Commissioni di performance", "Performance fees",
     "Impatto della commissione trattenuta se il prodotto supera il parametro di riferimento",
     "The impact of the fee taken when the product outperforms its benchmark", 2},
    {CostCategory::overperformance_fees, "Commissioni di overperformance", "Carried interests",
     "Impatto delle commissioni legate al superamento degli obiettivi di gestione",
     "The impact of carried interests", 2},
};

Built composition_table(bool english, Rng& rng) {
  Built b;
  b.spec.type = TableType::costs_composition;
  b.spec.edges = {100, 440, 620, 1140};
  b.spec.rows.push_back({{0, 1, english ? "Cost category" : "Categoria di costo"},
                         {1, 2, english ? "Annual RIY" : "RIY annuo"},
                         {2, 3, english ? "Description" : "Descrizione"}});
  const char* groups_it[] = {"Costi una tantum", "Costi correnti", "Oneri accessori"};
  const char* groups_en[] = {"One-off costs", "Ongoing costs", "Incidental costs"};
  CostsCompositionRecord rec;
  int current_group = -1;
  for (const auto& c : kCategories) {
    const bool always = c.category == CostCategory::entry || c.category == CostCategory::exit;
    if (!always && !rng.chance(0.7)) continue;
    if (c.group != current_group) {
      current_group = c.group;
      b.spec.rows.push_back({{0, 3, english ? groups_en[c.group] : groups_it[c.group]}});
    }
    const std::int64_t riy = rng.range(0, 250);
    b.spec.rows.push_back({{0, 1, english ? c.en_label : c.it_label, always},
                           {1, 2, percent_text(riy, english, rng), false, true},
                           {2, 3, english ? c.en_desc : c.it_desc}});
    rec.entries[c.category] = hundredths_decimal(riy);
  }
  b.record = rec;
  return b;
}

TableSpec decoy_table(bool english, Rng& rng) {
  TableSpec t;
  t.decoy = true;
  t.edges = {100, 600, 1140};
  t.rows = {{{0, 1, english ? "Additional information" : "Informazioni aggiuntive"},
             {1, 2, english ? "Value" : "Valore"}},
            {{0, 1, english ? "Currency" : "Valuta"}, {1, 2, "EUR"}},
            {{0, 1, english ? "Minimum investment" : "Investimento minimo"},
             {1, 2, money_text(rng.range(1, 50) * 100'000, english, rng), false, true}}};
  return t;
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

// Replaces '7' by '/' line by line, keeping at least half of each line's
// digits intact so the text still reads as numeric.
std::size_t confuse(std::string& text, double rate, Rng& rng) {
  std::size_t changed = 0;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::size_t digits = 0;
    for (std::size_t i = line_start; i < line_end; ++i) digits += text[i] >= '0' && text[i] <= '9';
    std::size_t budget = digits / 2;
    for (std::size_t i = line_start; i < line_end && budget > 0; ++i) {
      if (text[i] == '7' && rng.chance(rate)) {
        text[i] = '/';
        --budget;
        ++changed;
      }
    }
    line_start = line_end + 1;
  }
  return changed;
}

NoiseRecord apply_noise(const std::string& doc_id, const PlacedTable& t, PageDetections& page,
                        double rate, Rng& rng) {
  NoiseRecord r;
  r.doc_id = doc_id;
  r.type = t.type;
  for (const Placed& c : t.cells) {
    if (c.anchor) {
      ++r.anchor_cells;
      if (rng.chance(rate)) {
        page.detections[c.detection].confidence = static_cast<double>(rng.range(30, 59)) / 100.0;
        ++r.dropped_anchor_cells;
      }
    }
    if (c.numeric && c.ocr) r.confused_chars += confuse(page.ocr[*c.ocr].text, rate, rng);
  }
  r.expected_missing = r.anchor_cells > 0 && r.dropped_anchor_cells == r.anchor_cells;
  return r;
}

}  // namespace

std::string doc_id_for(std::size_t index) {
  std::string n = std::to_string(index + 1);
  if (n.size() < static_cast<std::size_t>(kDocIdDigits)) n.insert(0, kDocIdDigits - n.size(), '0');
  return "kid_" + n;
}

GeneratedDoc generate_document(std::size_t index, std::uint64_t seed, double noise) {
  const std::uint64_t base = splitmix64(seed) ^ splitmix64(0x5eed0000ULL + index);
  Rng rng(splitmix64(base));
  Rng noise_rng(splitmix64(base ^ 0xa5a5a5a5a5a5a5a5ULL));

  GeneratedDoc doc;
  doc.english = rng.chance(0.2);
  const bool en = doc.english;
  const std::string id = doc_id_for(index);
  const Product p = make_product(rng, en);
  doc.text.doc_id = id;
  doc.text.pages = page_texts(p, en);

  doc.fields = {
      {id, "COMPETENT_AUTHORITY", p.authority},
      {id, "CONTACT_PHONE", p.phone},
      {id, "DOCUMENT_DATE", p.date},
      {id, "ISIN", p.isin},
      {id, "MANUFACTURER", p.manufacturer},
      {id, "MANUFACTURER_WEBSITE", p.website},
      {id, "PRODUCT_NAME", p.name},
      {id, "SRI_RISK_CLASS", std::to_string(p.sri)},
  };

  PageDetections page2{id, 2, kPageWidth, kPageHeight, {}, {}};
  PageDetections page3{id, 3, kPageWidth, kPageHeight, {}, {}};

  Built perf = performance_table(p, en, rng);
  perf.spec.top = 520;
  add_caption(page2, perf.spec.top, en ? "Performance scenarios" : "Scenari di performance");
  const PlacedTable perf_placed = place_table(perf.spec, page2, rng);

  Built evo = evolution_table(p, en, rng);
  evo.spec.top = 360;
  add_caption(page3, evo.spec.top, en ? "Costs over time" : "Andamento dei costi nel tempo");
  const PlacedTable evo_placed = place_table(evo.spec, page3, rng);

  Built comp = composition_table(en, rng);
  comp.spec.top = evo.spec.top + table_height(evo.spec) + 140;
  add_caption(page3, comp.spec.top, en ? "Composition of costs" : "Composizione dei costi");
  const PlacedTable comp_placed = place_table(comp.spec, page3, rng);

  if (rng.chance(0.4)) {
    TableSpec decoy = decoy_table(en, rng);
    decoy.top = comp.spec.top + table_height(comp.spec) + 120;
    place_table(decoy, page3, rng);
  }

  doc.noise.push_back(apply_noise(id, perf_placed, page2, noise, noise_rng));
  doc.noise.push_back(apply_noise(id, evo_placed, page3, noise, noise_rng));
  doc.noise.push_back(apply_noise(id, comp_placed, page3, noise, noise_rng));

  for (PageDetections* page : {&page2, &page3}) {
    rng.shuffle(page->detections);
    rng.shuffle(page->ocr);
    doc.masks.push_back(std::move(*page));
  }

  doc.tables = {
      {id, 2, TableType::performance_scenarios, true, perf.record},
      {id, 3, TableType::costs_evolution, true, evo.record},
      {id, 3, TableType::costs_composition, true, comp.record},
  };
  return doc;
}

std::vector<GeneratedDoc> generate_corpus(const GenOptions& opts) {
  if (opts.n == 0) throw Error("corpus size must be at least 1");
  if (!(opts.noise >= 0.0 && opts.noise <= 1.0)) throw Error("noise must lie in [0,1]");
  std::vector<GeneratedDoc> docs;
  docs.reserve(opts.n);
  for (std::size_t i = 0; i < opts.n; ++i) docs.push_back(generate_document(i, opts.seed, opts.noise));
  return docs;
}

OrderedJson to_json(const NoiseRecord& r) {
  OrderedJson j;
  j["doc_id"] = r.doc_id;
  j["type"] = std::string(to_string(r.type));
  j["anchor_cells"] = r.anchor_cells;
  j["dropped_anchor_cells"] = r.dropped_anchor_cells;
  j["confused_chars"] = r.confused_chars;
  j["expected_missing"] = r.expected_missing;
  return j;
}

void write_corpus(const std::vector<GeneratedDoc>& docs, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  std::error_code ec;
  for (const char* sub : {"docs", "masks", "gold"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw IoError("cannot create " + (root / sub).string() + ": " + ec.message());
  }
  std::ostringstream fields, tables, noise;
  for (const GeneratedDoc& d : docs) {
    OrderedJson pt;
    pt["doc_id"] = d.text.doc_id;
    pt["pages"] = d.text.pages;
    write_file((root / "docs" / (d.text.doc_id + ".json")).string(), pt.dump(2) + "\n");
    for (const PageDetections& m : d.masks) {
      Json j = m;
      write_file((root / "masks" / (m.doc_id + "_p" + std::to_string(m.page) + ".json")).string(), j.dump(1) + "\n");
    }
    evalkit::write_gold_fields(fields, d.fields);
    for (const auto& t : d.tables) tables << tabrec::to_json(t).dump() << '\n';
    for (const auto& n : d.noise) noise << to_json(n).dump() << '\n';
  }
  write_file((root / "gold" / "fields.jsonl").string(), fields.str());
  write_file((root / "gold" / "tables.jsonl").string(), tables.str());
  write_file((root / "gold" / "noise.jsonl").string(), noise.str());
}

void gen_corpus(const GenOptions& opts, const std::string& out_dir) {
  write_corpus(generate_corpus(opts), out_dir);
}

}  // namespace kidex::gen
