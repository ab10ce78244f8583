#pragma once

// ISIN rule and a KID product section shared by the unit and acceptance
// tests.

namespace fixtures {

/// The published ISIN rule with its elided alternatives removed.
inline constexpr const char* kIsinRule = R"TRE($StartISIN = (
	/ISIN/ /:/ |
    /Codice/ /del/ /Prodotto|prodotto/ /:/
)
$EndISIN = (
	/*/
)
$code = "/([A-Za-z][A-Za-z][0-9]{10})/"
{
    ruleType: "tokens",
    pattern: (
        ($StartISIN) (?$CodeISIN [{word:$code} &
        {SECTION:"SECTION_PRODUCT"}]+?) ($EndISIN)
        ),
    action: ( Annotate($CodeISIN, ISIN, "ISIN"))
}
)TRE";

/// Opening of a structured-product KID, laid out as the extracted text of
/// its first page.
inline constexpr const char* kProductSection =
    "Documento contenente le informazioni chiave\n"
    "Scopo\n"
    "Il presente documento contiene informazioni chiave relative a questo prodotto "
    "d'investimento. Non si tratta di un documento promozionale.\n"
    "Prodotto\n"
    "Nome del prodotto: 7.25% p.a. Callable Barrier Reverse Convertible su Nestl\xC3\xA9, Roche\n"
    "ISIN: CH0524993752\n"
    "Ideatore del prodotto: Credit Suisse AG, Zurigo, Svizzera (www.credit-suisse.com)\n"
    "Per ulteriori informazioni chiamare il numero +41 44 335 76 00.\n"
    "Autorit\xC3\xA0 di vigilanza competente: Autorit\xC3\xA0 federale di vigilanza sui mercati finanziari FINMA.\n"
    "Data di realizzazione del documento: 14/04/2020\n"
    "Avvertenza: state per acquistare un prodotto che non \xC3\xA8 semplice e pu\xC3\xB2 essere di difficile "
    "comprensione.\n"
    "Cos'\xC3\xA8 questo prodotto?\n"
    "Tipo: Strumento di debito di diritto svizzero.\n"
    "Quali sono i rischi e qual \xC3\xA8 il potenziale rendimento?\n"
    "Indicatore di rischio\n";

}  // namespace fixtures
