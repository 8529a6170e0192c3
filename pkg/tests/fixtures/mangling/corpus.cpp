// Mangling oracle corpus: compiled once with g++ to capture ground-truth symbols.
struct Vec3 { float x, y, z; };
struct Node;

namespace math {
struct Matrix { double m[16]; };
struct Quat { float w, x, y, z; };
}

namespace ns {
class Widget {
public:
    enum Mode { Small, Large };
    void resize(unsigned long n, bool keep);
    int size() const;
    void setMode(Mode m);
    void swap(Widget& other);
    bool same(const Widget& a, const Widget& b) const;
    void attach(Widget* parent, Widget* child);
    static int count();
    void noop() { }
    int width() const { return w; }
    Widget& operator=(const Widget& o) { w = o.w; return *this; }
    bool operator==(const Widget& o) const { return w == o.w; }
    bool operator<(const Widget& o) const { return w < o.w; }
    int operator[](int i) const { return i; }
    int operator()(int a, int b) { return a + b; }
private:
    int w = 0;
};
}

void f(int) {}
void g() {}
int add(int a, int b) { return a + b; }
void take_char(char c) {}
void take_schar(signed char c) {}
void take_uchar(unsigned char c) {}
void take_short(short s) {}
void take_ushort(unsigned short s) {}
void take_uint(unsigned int u) {}
void take_unsigned(unsigned u) {}
void take_long(long l) {}
void take_ulong(unsigned long l) {}
void take_llong(long long l) {}
void take_ullong(unsigned long long l) {}
void take_float(float v) {}
void take_double(double v) {}
void take_ldouble(long double v) {}
void take_bool(bool b) {}
void take_wchar(wchar_t w) {}
void take_void(void) {}
void const_param(const int x) {}
void int_ptr(int* p) {}
void const_int_ptr(const int* p) {}
void int_ref(int& r) {}
void const_int_ref(const int& r) {}
void int_rref(int&& r) {}
void ptr_ptr(char** argv) {}
void const_ptr_const(const char* const p) {}
void two_ptrs(int* a, int* b) {}
void two_const_ptrs(const int* a, const int* b) {}
void vec_by_value(Vec3 v) {}
void vec_refs(const Vec3& a, const Vec3& b) {}
void vec_mixed(Vec3* out, const Vec3& in, float s) {}
void node_ptrs(Node* a, Node** b, Node* c) {}
void unsigned_long_int(unsigned long int n) {}
void long_int(long int n) {}
void short_int(short int n) {}
void signed_int(signed int n) {}
void cpp_style(int* const* p) {}

void ns::Widget::resize(unsigned long n, bool keep) {}
int ns::Widget::size() const { return 0; }
void ns::Widget::setMode(Mode m) {}
void ns::Widget::swap(Widget& other) {}
bool ns::Widget::same(const Widget& a, const Widget& b) const { return true; }
void ns::Widget::attach(Widget* parent, Widget* child) {}
int ns::Widget::count() { return 1; }

namespace ns {
void go() {}
void go(int x) {}
void helper(Widget& w, Widget::Mode m) {}
int clamp(int v, int lo, int hi) { return v; }
namespace detail {
void deep(long a, unsigned short b) {}
void deep_widget(const ns::Widget* w) {}
void deep_vec(Vec3& v, Vec3& w) {}
}
}

namespace other {
void go() {}
}

namespace math {
Matrix multiply(const Matrix& a, const Matrix& b) { return a; }
Quat normalize(const Quat& q) { return q; }
void transform(Matrix* out, const Matrix& m, const Vec3& v) {}
float dot(const Vec3& a, const Vec3& b) { return 0; }
bool operator==(const Quat& a, const Quat& b) { return true; }
bool operator!=(const Quat& a, const Quat& b) { return false; }
}

class Physics {
public:
    void ApplyForces(Vec3 f);
    void Step(double dt) const;
    void Integrate(math::Quat& q, const math::Quat& dq);
};

void Physics::ApplyForces(Vec3 f) {}
void Physics::Step(double dt) const {}
void Physics::Integrate(math::Quat& q, const math::Quat& dq) {}

extern "C" void c_entry(int x) {}
extern "C" {
int c_block_fn(void) { return 0; }
}

int main(int argc, char** argv) { return 0; }
