#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "malseq/error.hpp"
#include "malseq/rng.hpp"
#include "malseq/text_ir.hpp"

namespace malseq {

// Knobs for the synthetic labeled corpus. Benign and malicious programs draw
// from the same pools; what separates the classes is the ordered motif
// planted into a malicious program's ground-truth methods. Scattered
// sensitive APIs appear in both classes (never adjacent to each other), so
// API presence alone does not decide the label.
struct SyntheticSpec {
  std::uint32_t min_methods = 20;
  std::uint32_t max_methods = 60;
  std::uint32_t min_invokes = 2;   // fan-out target per method, APIs + calls
  std::uint32_t max_invokes = 8;
  std::uint32_t planted_methods = 2;
  double recursion_probability = 0.05;  // self-recursive call sites
  double extra_edge_probability = 0.10; // shared (multi-caller) subtrees
  double sensitive_probability = 0.10;
  double ignored_probability = 0.08;    // java/ and third-party refs, never emitted
  double noise_probability = 0.05;      // malware-only background APIs
  double common_probability = 0.93;     // per-program presence of each common API
  std::uint32_t max_sequence_len = 400; // expansion budget per program
  std::uint64_t seed = 42;

  std::vector<std::string> common_pool;     // near-universal, exercises the filter
  std::vector<std::string> benign_pool;
  std::vector<std::string> sensitive_pool;  // motif constituents, shared by both classes
  std::vector<std::string> ignored_pool;
  std::vector<std::string> noise_pool;
  std::vector<std::vector<std::string>> motif_pools;  // ordered malicious motifs
};

inline SyntheticSpec default_synthetic_spec() {
  SyntheticSpec spec;
  spec.common_pool = {
      "Landroid/app/Activity;-><init>()V",
      "Landroid/app/Activity;->onCreate(Landroid/os/Bundle;)V",
      "Landroid/app/Activity;->setContentView(I)V",
      "Landroid/content/Intent;-><init>()V",
      "Landroid/content/Context;->getSystemService(Ljava/lang/String;)Ljava/lang/Object;",
      "Landroid/os/Bundle;->getString(Ljava/lang/String;)Ljava/lang/String;",
      "Landroid/view/View;->findViewById(I)Landroid/view/View;",
      "Landroid/util/Log;->d(Ljava/lang/String;Ljava/lang/String;)I",
  };
  spec.benign_pool = {
      "Landroid/widget/TextView;->setText(Ljava/lang/CharSequence;)V",
      "Landroid/widget/Button;->setOnClickListener(Landroid/view/View$OnClickListener;)V",
      "Landroid/widget/Toast;->makeText(Landroid/content/Context;Ljava/lang/CharSequence;I)Landroid/widget/Toast;",
      "Landroid/widget/Toast;->show()V",
      "Landroid/os/Handler;->post(Ljava/lang/Runnable;)Z",
      "Landroid/os/Handler;->sendEmptyMessage(I)Z",
      "Landroid/content/res/Resources;->getString(I)Ljava/lang/String;",
      "Landroid/content/SharedPreferences;->getString(Ljava/lang/String;Ljava/lang/String;)Ljava/lang/String;",
      "Landroid/content/SharedPreferences$Editor;->putString(Ljava/lang/String;Ljava/lang/String;)Landroid/content/SharedPreferences$Editor;",
      "Landroid/content/SharedPreferences$Editor;->commit()Z",
      "Landroid/graphics/Paint;->setColor(I)V",
      "Landroid/graphics/Canvas;->drawRect(FFFFLandroid/graphics/Paint;)V",
      "Landroid/view/LayoutInflater;->inflate(ILandroid/view/ViewGroup;)Landroid/view/View;",
      "Landroid/view/View;->setVisibility(I)V",
      "Landroid/app/AlertDialog$Builder;-><init>(Landroid/content/Context;)V",
      "Landroid/app/AlertDialog$Builder;->show()Landroid/app/AlertDialog;",
      "Landroid/media/MediaPlayer;->start()V",
      "Landroid/media/MediaPlayer;->release()V",
      "Landroid/database/sqlite/SQLiteDatabase;->query(Ljava/lang/String;[Ljava/lang/String;Ljava/lang/String;[Ljava/lang/String;Ljava/lang/String;Ljava/lang/String;Ljava/lang/String;)Landroid/database/Cursor;",
      "Landroid/database/Cursor;->moveToNext()Z",
      "Landroid/database/Cursor;->close()V",
      "Landroid/animation/ObjectAnimator;->start()V",
      "Landroid/webkit/WebView;->loadUrl(Ljava/lang/String;)V",
      "Landroid/app/NotificationManager;->notify(ILandroid/app/Notification;)V",
  };
  spec.sensitive_pool = {
      "Landroid/telephony/SmsManager;->getDefault()Landroid/telephony/SmsManager;",
      "Landroid/telephony/SmsManager;->sendTextMessage(Ljava/lang/String;Ljava/lang/String;Ljava/lang/String;Landroid/app/PendingIntent;Landroid/app/PendingIntent;)V",
      "Landroid/telephony/TelephonyManager;->getLine1Number()Ljava/lang/String;",
      "Landroid/telephony/TelephonyManager;->getDeviceId()Ljava/lang/String;",
      "Landroid/telephony/SmsMessage;->createFromPdu([B)Landroid/telephony/SmsMessage;",
      "Landroid/net/wifi/WifiInfo;->getMacAddress()Ljava/lang/String;",
      "Landroid/location/Criteria;->setAccuracy(I)V",
      "Landroid/provider/Settings$Secure;->getString(Landroid/content/ContentResolver;Ljava/lang/String;)Ljava/lang/String;",
  };
  spec.ignored_pool = {
      "Ljava/lang/StringBuilder;->append(Ljava/lang/String;)Ljava/lang/StringBuilder;",
      "Ljava/lang/StringBuilder;->toString()Ljava/lang/String;",
      "Ljava/lang/String;->length()I",
      "Ljava/util/ArrayList;->add(Ljava/lang/Object;)Z",
      "Ljava/util/HashMap;->put(Ljava/lang/Object;Ljava/lang/Object;)Ljava/lang/Object;",
      "Ljavax/crypto/Cipher;->doFinal([B)[B",
      "Lcom/example/ads/AdLoader;->loadAd()V",
      "Lokhttp3/Call;->execute()Lokhttp3/Response;",
  };
  spec.noise_pool = {
      "Landroid/app/admin/DeviceAdminReceiver;->onEnabled(Landroid/content/Context;Landroid/content/Intent;)V",
      "Landroid/app/admin/DevicePolicyManager;->lockNow()V",
      "Landroid/content/pm/PackageManager;->setComponentEnabledSetting(Landroid/content/ComponentName;II)V",
      "Landroid/widget/RelativeLayout;->onTrackballEvent(Landroid/view/MotionEvent;)Z",
  };
  spec.motif_pools = {
      {
          "Landroid/telephony/SmsManager;->getDefault()Landroid/telephony/SmsManager;",
          "Landroid/telephony/TelephonyManager;->getLine1Number()Ljava/lang/String;",
          "Landroid/telephony/SmsManager;->sendTextMessage(Ljava/lang/String;Ljava/lang/String;Ljava/lang/String;Landroid/app/PendingIntent;Landroid/app/PendingIntent;)V",
      },
      {
          "Landroid/telephony/SmsMessage;->createFromPdu([B)Landroid/telephony/SmsMessage;",
          "Landroid/telephony/TelephonyManager;->getDeviceId()Ljava/lang/String;",
          "Landroid/telephony/SmsManager;->sendTextMessage(Ljava/lang/String;Ljava/lang/String;Ljava/lang/String;Landroid/app/PendingIntent;Landroid/app/PendingIntent;)V",
      },
      {
          "Landroid/location/Criteria;->setAccuracy(I)V",
          "Landroid/net/wifi/WifiInfo;->getMacAddress()Ljava/lang/String;",
          "Landroid/provider/Settings$Secure;->getString(Landroid/content/ContentResolver;Ljava/lang/String;)Ljava/lang/String;",
      },
  };
  return spec;
}

struct SyntheticProgram {
  std::vector<IrMethod> methods;
  std::optional<Label> label;
  std::vector<std::string> planted;  // ground-truth method signatures
  std::string ir_json;
};

struct ManifestEntry {
  std::string id;
  Label label = Label::Benign;
  std::string path;
  std::vector<std::string> planted;
};

namespace syndetail {

struct Item {
  bool internal = false;
  std::uint32_t callee = 0;  // when internal
  std::string api;           // when external
};

// Exact emitted length under the extractor's semantics: call edges ascend
// method indices, so the only cuts are self-recursive sites (always skipped).
inline std::uint64_t expansion_length(const std::vector<std::uint64_t>& own,
                                      const std::vector<std::vector<std::uint32_t>>& callees,
                                      std::uint32_t root_count) {
  const std::size_t n = own.size();
  std::vector<std::uint64_t> len(n, 0);
  for (std::size_t m = n; m-- > 0;) {
    std::uint64_t acc = own[m];
    for (std::uint32_t c : callees[m]) {
      if (c != m) acc += len[c];
    }
    len[m] = acc;
  }
  std::uint64_t total = 0;
  for (std::uint32_t r = 0; r < root_count; ++r) total += len[r];
  return total;
}

}  // namespace syndetail

// Generates one labeled program over a rooted forest of methods plus a few
// shared subtrees and self-recursive sites. Malicious programs plant the
// chosen motif contiguously inside planted_methods ground-truth methods, all
// reachable from a root by construction.
inline SyntheticProgram generate_synthetic_program(const SyntheticSpec& spec, Label label,
                                                   Rng& rng) {
  if (spec.min_methods < 4 || spec.max_methods < spec.min_methods ||
      spec.max_invokes < spec.min_invokes) {
    raise(errc::infeasible_spec, "bad method or fan-out range");
  }
  if (spec.benign_pool.empty() || spec.common_pool.empty() || spec.sensitive_pool.empty()) {
    raise(errc::infeasible_spec, "api pools must be non-empty");
  }
  const std::uint32_t n = static_cast<std::uint32_t>(
      rng.uniform_int(spec.min_methods, spec.max_methods));
  const bool malicious = label == Label::Malicious;
  if (malicious && spec.planted_methods > n) {
    raise(errc::infeasible_spec, "planted method count exceeds method count");
  }
  if (malicious && spec.planted_methods > 0 && spec.motif_pools.empty()) {
    raise(errc::infeasible_spec, "malicious programs need at least one motif pool");
  }

  const std::uint32_t root_count =
      std::min<std::uint32_t>(1 + static_cast<std::uint32_t>(rng.uniform_int(3)), n / 5);

  // rooted forest: every non-root has exactly one earlier parent, and every
  // root gets a guaranteed child
  std::vector<std::vector<std::uint32_t>> callees(n);
  for (std::uint32_t j = root_count; j < n; ++j) {
    std::uint32_t parent = j < 2 * root_count
                               ? j - root_count
                               : static_cast<std::uint32_t>(rng.uniform_int(j));
    callees[parent].push_back(j);
  }

  // a self-call would give a root an in-degree and disqualify it
  std::vector<bool> self_recursive(n, false);
  for (std::uint32_t j = root_count; j < n; ++j) {
    self_recursive[j] = rng.bernoulli(spec.recursion_probability);
  }

  // motif and ground truth
  std::vector<std::string> motif;
  std::vector<bool> planted(n, false);
  if (malicious && spec.planted_methods > 0) {
    motif = spec.motif_pools[rng.uniform_int(spec.motif_pools.size())];
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_int(static_cast<std::uint64_t>(i))]);
    }
    for (std::uint32_t i = 0; i < spec.planted_methods; ++i) planted[order[i]] = true;
  }

  // per-program prologue of near-universal APIs on the first root
  std::vector<std::string> prologue;
  for (const auto& api : spec.common_pool) {
    if (rng.bernoulli(spec.common_probability)) prologue.push_back(api);
  }

  std::vector<std::uint64_t> own(n, 0);
  std::vector<std::uint32_t> napi(n, 0);
  for (std::uint32_t j = 0; j < n; ++j) {
    std::uint32_t target =
        static_cast<std::uint32_t>(rng.uniform_int(spec.min_invokes, spec.max_invokes));
    std::uint32_t structural = static_cast<std::uint32_t>(callees[j].size());
    napi[j] = target > structural ? target - structural : 1;
    own[j] = napi[j] + (planted[j] ? motif.size() : 0) + (j == 0 ? prologue.size() : 0);
  }

  // shared subtrees, kept within the expansion budget
  for (std::uint32_t j = 0; j < n; ++j) {
    if (!rng.bernoulli(spec.extra_edge_probability)) continue;
    std::uint32_t e = root_count + static_cast<std::uint32_t>(rng.uniform_int(n - root_count));
    if (e <= j) continue;
    callees[j].push_back(e);
    if (syndetail::expansion_length(own, callees, root_count) > spec.max_sequence_len) {
      callees[j].pop_back();
    }
  }

  // bodies: API slots with internal call sites interleaved at random spots
  static const char* kProtos[] = {"()V", "(I)V", "(Ljava/lang/String;)V", "()Z", "(II)V",
                                  "(Landroid/content/Context;)V"};
  std::vector<IrMethod> methods(n);
  for (std::uint32_t j = 0; j < n; ++j) {
    methods[j].class_desc = "Lapp/gen/C" + std::to_string(j / 4) + ";";
    methods[j].name = "m" + std::to_string(j % 4);
    methods[j].proto = kProtos[rng.uniform_int(std::size(kProtos))];
  }

  SyntheticProgram out;
  out.label = label;
  for (std::uint32_t j = 0; j < n; ++j) {
    std::vector<syndetail::Item> items;
    bool last_sensitive = false;
    for (std::uint32_t a = 0; a < napi[j]; ++a) {
      syndetail::Item it;
      double r = rng.uniform();
      double ignored_cut = spec.ignored_probability;
      double noise_cut = ignored_cut + (malicious ? spec.noise_probability : 0.0);
      double sensitive_cut = noise_cut + spec.sensitive_probability;
      if (r < ignored_cut && !spec.ignored_pool.empty()) {
        it.api = spec.ignored_pool[rng.uniform_int(spec.ignored_pool.size())];
        last_sensitive = false;
      } else if (r < noise_cut && !spec.noise_pool.empty()) {
        it.api = spec.noise_pool[rng.uniform_int(spec.noise_pool.size())];
        last_sensitive = false;
      } else if (r < sensitive_cut && !last_sensitive) {
        it.api = spec.sensitive_pool[rng.uniform_int(spec.sensitive_pool.size())];
        last_sensitive = true;
      } else {
        it.api = spec.benign_pool[rng.uniform_int(spec.benign_pool.size())];
        last_sensitive = false;
      }
      items.push_back(std::move(it));
    }
    for (std::uint32_t callee : callees[j]) {
      syndetail::Item it;
      it.internal = true;
      it.callee = callee;
      items.insert(items.begin() + rng.uniform_int(items.size() + 1), std::move(it));
    }
    if (self_recursive[j]) {
      syndetail::Item it;
      it.internal = true;
      it.callee = j;
      items.insert(items.begin() + rng.uniform_int(items.size() + 1), std::move(it));
    }
    if (planted[j]) {
      std::size_t at = rng.uniform_int(items.size() + 1);
      for (std::size_t i = 0; i < motif.size(); ++i) {
        syndetail::Item it;
        it.api = motif[i];
        items.insert(items.begin() + at + i, std::move(it));
      }
    }
    if (j == 0) {
      for (std::size_t i = 0; i < prologue.size(); ++i) {
        syndetail::Item it;
        it.api = prologue[i];
        items.insert(items.begin() + i, std::move(it));
      }
    }

    for (const auto& it : items) {
      if (it.internal) {
        const IrMethod& callee = methods[it.callee];
        methods[j].invokes.push_back(callee.class_desc + "->" + callee.name + callee.proto);
      } else {
        methods[j].invokes.push_back(it.api);
      }
    }
  }

  for (std::uint32_t j = 0; j < n; ++j) {
    if (planted[j]) {
      out.planted.push_back(methods[j].class_desc + "->" + methods[j].name + methods[j].proto);
    }
  }
  out.methods = std::move(methods);
  out.ir_json = write_ir(out.methods, label);
  return out;
}

inline std::string manifest_to_json_line(const ManifestEntry& entry) {
  nlohmann::json j;
  j["id"] = entry.id;
  j["label"] = label_name(entry.label);
  j["path"] = entry.path;
  j["planted"] = entry.planted;
  return j.dump();
}

inline ManifestEntry manifest_from_json_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    raise(errc::schema_violation, std::string("bad manifest line: ") + e.what());
  }
  if (!j.contains("id") || !j.contains("label") || !j.contains("path")) {
    raise(errc::schema_violation, "manifest lines need id/label/path");
  }
  ManifestEntry entry;
  entry.id = j["id"].get<std::string>();
  std::string l = j["label"].get<std::string>();
  if (l == "malicious") entry.label = Label::Malicious;
  else if (l == "benign") entry.label = Label::Benign;
  else raise(errc::schema_violation, "unknown label '" + l + "'");
  entry.path = j["path"].get<std::string>();
  if (j.contains("planted")) {
    for (const auto& s : j["planted"]) entry.planted.push_back(s.get<std::string>());
  }
  return entry;
}

}  // namespace malseq
