#include "skillweave/banking.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <regex>

namespace skillweave {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool mentions(const Event& event, std::initializer_list<const char*> words) {
    std::string text = " " + normalize_phrase(event.text) + " ";
    for (const char* word : words)
        if (text.find(std::string(" ") + word + " ") != std::string::npos)
            return true;
    return false;
}

std::string input(const InvocationRequest& request, const ElementId& element) {
    auto it = request.inputs.find(element);
    return it == request.inputs.end() ? std::string{} : it->second;
}

// Amounts arrive as typed by the user: "85000", "$85,000", "20k".
std::optional<double> parse_amount(std::string_view text) {
    std::string digits;
    double scale = 1.0;
    for (char c : text) {
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            digits += c;
        else if (c == 'k' || c == 'K')
            scale = 1000.0;
    }
    if (digits.empty())
        return std::nullopt;
    try {
        return std::stod(digits) * scale;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<int> parse_int(std::string_view text) {
    auto amount = parse_amount(text);
    if (!amount)
        return std::nullopt;
    return static_cast<int>(*amount);
}

std::string money(double amount) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.2f", amount);
    std::string fixed = buffer;
    auto dot = fixed.find('.');
    std::string whole = fixed.substr(0, dot);
    std::string grouped;
    for (std::size_t i = 0; i < whole.size(); ++i) {
        if (i > 0 && (whole.size() - i) % 3 == 0)
            grouped += ',';
        grouped += whole[i];
    }
    return "$" + grouped + fixed.substr(dot);
}

struct Customer {
    std::string id;
    std::string name;
    int credit_score;
    double balance;
};

class DbRetrieveSkill : public SkillRuntime {
public:
    explicit DbRetrieveSkill(std::uint64_t seed) : seed_(seed) {}

    InvocationResult execute(const InvocationRequest& request) const override {
        ElementId key = request.pair_id == "by_account" ? "account_number" : "email";
        std::string value = lower(input(request, key));
        auto customer = lookup(key, value);
        if (!customer)
            return InvocationResult::failed("No customer record matches that " +
                                            std::string(key == "email" ? "email address" : "account number") + ".");
        auto result = InvocationResult::outcome(0, {
            {"bank_record", customer->id + " (" + customer->name + ")"},
            {"credit_score", std::to_string(customer->credit_score)},
            {"account_balance", money(customer->balance)},
        });
        result.attributions = {{key, 1.0}};
        return result;
    }

    std::optional<double> preview(const Event& event) const override {
        if (mentions(event, {"balance", "record", "statement"}))
            return 0.8;
        if (mentions(event, {"account"}))
            return 0.5;
        return 0.0;
    }

private:
    std::optional<Customer> lookup(const ElementId& key, const std::string& value) const {
        if (value.empty() || value.find("ghost") != std::string::npos)
            return std::nullopt;
        if (value == "jane@example.com" || value == "11223344")
            return Customer{"C-1001", "Jane Doe", 742, 4250.0};
        if (value == "sam@example.com" || value == "55667788")
            return Customer{"C-1002", "Sam Lee", 580, 310.55};
        // Anyone else gets a stable synthetic record.
        std::uint64_t h = fingerprint(key + ":" + value) ^ seed_;
        h = fingerprint(hex64(h));
        int score = 520 + static_cast<int>(h % 330);
        double balance = static_cast<double>((h >> 16) % 2000000) / 100.0;
        return Customer{"C-" + std::to_string(2000 + (h >> 40) % 8000), "Customer", score, balance};
    }

    std::uint64_t seed_;
};

class LoanSubmitSkill : public SkillRuntime {
public:
    InvocationResult execute(const InvocationRequest& request) const override {
        auto score = parse_int(input(request, "credit_score"));
        auto salary = parse_amount(input(request, "salary"));
        auto amount = parse_amount(input(request, "loan_amount"));
        if (!score || !salary || !amount || input(request, "full_name").empty())
            return InvocationResult::failed("The loan service could not read the application.");
        InvocationResult result;
        if (*score < 650) {
            result = InvocationResult::outcome(1, {{"loan_rejected", "rejected: credit score too low"}});
            result.attributions = {{"credit_score", 0.7}, {"loan_amount", 0.15}, {"salary", 0.1}, {"full_name", 0.05}};
        } else if (*amount <= 0.5 * *salary) {
            result = InvocationResult::outcome(0, {{"loan_approved", "approved for " + money(*amount)}});
            result.attributions = {{"credit_score", 0.5}, {"salary", 0.25}, {"loan_amount", 0.2}, {"full_name", 0.05}};
        } else {
            result = InvocationResult::outcome(2, {{"loan_referred", "referred to an advisor: amount is high for the salary"}});
            result.attributions = {{"loan_amount", 0.45}, {"salary", 0.4}, {"credit_score", 0.1}, {"full_name", 0.05}};
        }
        return result;
    }

    std::optional<double> preview(const Event& event) const override {
        if (mentions(event, {"loan", "mortgage", "borrow"}))
            return 0.9;
        return 0.0;
    }
};

class CardSubmitSkill : public SkillRuntime {
public:
    InvocationResult execute(const InvocationRequest& request) const override {
        auto score = parse_int(input(request, "credit_score"));
        if (!score || input(request, "full_name").empty() || input(request, "address").empty())
            return InvocationResult::failed("The card service could not read the application.");
        InvocationResult result;
        if (*score < 620)
            result = InvocationResult::outcome(1, {{"card_rejected", "rejected: credit score too low"}});
        else if (*score >= 700)
            result = InvocationResult::outcome(0, {{"card_approved", "approved with a $5,000.00 limit"}});
        else
            result = InvocationResult::outcome(2, {{"card_referred", "referred for manual review"}});
        result.attributions = {{"credit_score", 0.6}, {"address", 0.25}, {"full_name", 0.15}};
        return result;
    }

    std::optional<double> preview(const Event& event) const override {
        if (mentions(event, {"card", "credit card"}))
            return 0.9;
        return 0.0;
    }
};

std::string title_case(std::string_view text) {
    std::string out;
    bool start = true;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalpha(u)) {
            out += static_cast<char>(start ? std::toupper(u) : std::tolower(u));
            start = false;
        } else {
            if (!out.empty() && out.back() != ' ')
                out += ' ';
            start = true;
        }
    }
    while (!out.empty() && out.back() == ' ')
        out.pop_back();
    return out;
}

class OcrSkill : public SkillRuntime {
public:
    InvocationResult execute(const InvocationRequest& request) const override {
        std::string document = lower(input(request, "id_document"));
        if (document.empty() || document.find("blurry") != std::string::npos)
            return InvocationResult::failed("The document scan was unreadable.");
        if (document.find("jane") != std::string::npos)
            return InvocationResult::outcome(0, {{"full_name", "Jane Doe"}, {"address", "12 Elm Street, Springfield"}});
        // Name taken from the file name: "john_smith_id.png" reads as John Smith.
        std::string stem = document.substr(0, document.find('.'));
        static const std::regex noise("(^|_|-)(id|passport|licen[cs]e|scan|doc(ument)?)($|_|-)");
        stem = std::regex_replace(stem, noise, "_");
        std::string name = title_case(stem);
        if (name.empty())
            name = "Document Holder";
        return InvocationResult::outcome(0, {{"full_name", name}, {"address", "1 Main Street, Springfield"}});
    }

    std::optional<double> preview(const Event& event) const override {
        if (mentions(event, {"document", "scan", "passport", "id"}))
            return 0.6;
        return 0.0;
    }
};

}  // namespace

CatalogFile banking_catalog() {
    return parse_catalog(banking_catalog_text());
}

std::shared_ptr<const SkillRuntime> make_fixture_skill(std::string_view locator, std::uint64_t seed) {
    if (locator == "banking/db_retrieve")
        return std::make_shared<DbRetrieveSkill>(seed);
    if (locator == "banking/loan_submit")
        return std::make_shared<LoanSubmitSkill>();
    if (locator == "banking/card_submit")
        return std::make_shared<CardSubmitSkill>();
    if (locator == "banking/ocr")
        return std::make_shared<OcrSkill>();
    throw CatalogError("unknown fixture skill '" + std::string(locator) + "'");
}

}  // namespace skillweave
