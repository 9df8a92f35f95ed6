public class CountCharac {

    //@ requires str1!= null;
    //@ ensures \result == str1.length();
    public static int countCharac(String str1) {
        return str1.length();
    }
}
