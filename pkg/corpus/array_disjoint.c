// expect: race_free
int a[4];
void *t1(void *p) {
  a[0] = 1;
  return NULL;
}
void *t2(void *p) {
  a[1] = 2;
  return NULL;
}
int main() {
  create(t1);
  create(t2);
  return 0;
}
